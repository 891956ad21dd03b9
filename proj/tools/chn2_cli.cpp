#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chn2/chn2.hpp"

using namespace chn2;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  for (const auto& tok : io::detail::split(text, ',')) {
    try {
      out.push_back(io::detail::parse_double(tok));
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": cannot parse '" + tok + "' as a number");
    }
  }
  return out;
}

// "lo0,lo1,...,hi0,hi1,..."
Window parse_window(const std::string& text) {
  const auto v = parse_list(text, "--window");
  if (v.empty() || v.size() % 2 != 0) throw UsageError("--window: expected lo and hi per axis, e.g. 0,0,100,100");
  const std::size_t d = v.size() / 2;
  return Window(std::vector<double>(v.begin(), v.begin() + d), std::vector<double>(v.begin() + d, v.end()));
}

// "x,y;x,y;..."
std::vector<std::vector<double>> parse_centers(const std::string& text) {
  std::vector<std::vector<double>> out;
  for (const auto& tok : io::detail::split(text, ';')) {
    if (tok.empty()) continue;
    out.push_back(parse_list(tok, "--centers"));
  }
  return out;
}

// "a..b" inclusive
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw UsageError("--seeds: expected a..b");
  try {
    const std::uint64_t a = std::stoull(text.substr(0, dots));
    const std::uint64_t b = std::stoull(text.substr(dots + 2));
    if (b < a) throw UsageError("--seeds: empty range");
    return {a, b};
  } catch (const std::logic_error&) {
    throw UsageError("--seeds: expected a..b with non-negative integers");
  }
}

std::string with_seed(const std::string& pattern, std::uint64_t seed) {
  const auto pos = pattern.find("{seed}");
  if (pos == std::string::npos) throw UsageError("--out must contain {seed} when --seeds is given");
  std::string out = pattern;
  out.replace(pos, 6, std::to_string(seed));
  return out;
}

Metric parse_metric(const std::string& name, const Window& w) {
  if (name == "euclidean") return Metric::euclidean();
  if (name == "torus") return Metric::torus(w);
  throw UsageError("--metric must be euclidean or torus");
}

// Accepts a levels CSV from `stats` or a series CSV from `baseline`.
std::vector<double> read_series(const std::string& path) {
  std::istringstream in(io::read_text(path));
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  in.seekg(0);
  if (header == io::kLevelsHeader) return io::distance_series(io::levels_from_csv(in));
  if (header.rfind("level,mean_merge_distance", 0) == 0) {
    std::getline(in, header);
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = io::detail::split(line, ',');
      if (f.size() < 2) throw io::FormatError(path + ": short row");
      if (io::detail::parse_size(f[0]) != out.size()) throw io::FormatError(path + ": levels out of order");
      out.push_back(io::detail::parse_double(f[1]));
    }
    return out;
  }
  throw io::FormatError(path + ": unrecognised CSV header '" + header + "'");
}

struct GenerateArgs {
  std::string kind;
  std::string window;
  std::optional<double> lambda;
  std::optional<std::uint64_t> count;
  std::optional<std::size_t> dim;
  std::uint64_t seed = 0;
  std::string seeds;
  std::string centers;
  std::string radii;
  std::optional<double> center_intensity;
  std::string radius_range;
  std::string out;
};

Sample generate_one(const GenerateArgs& a, std::uint64_t seed) {
  const Window w = parse_window(a.window);
  const std::size_t dim = a.dim.value_or(w.dim());
  if (a.kind == "poisson") {
    if (!a.lambda) throw UsageError("generate poisson needs --lambda");
    return gen_poisson(*a.lambda, w, dim, seed);
  }
  if (a.kind == "binomial") {
    if (!a.count) throw UsageError("generate binomial needs --count");
    return gen_binomial(*a.count, w, dim, seed);
  }
  CoxBallSpec spec;
  if (!a.lambda) throw UsageError("generate cox needs --lambda");
  spec.lambda = *a.lambda;
  if (a.center_intensity) {
    spec.center_intensity = a.center_intensity;
    const auto r = parse_list(a.radius_range, "--radius-range");
    if (r.size() != 2) throw UsageError("--radius-range: expected rmin,rmax");
    spec.radius_range = std::pair{r[0], r[1]};
  } else {
    if (a.centers.empty() || a.radii.empty()) throw UsageError("generate cox needs --centers and --radii (or --center-intensity)");
    spec.centers = parse_centers(a.centers);
    spec.radii = parse_list(a.radii, "--radii");
  }
  const Sample s = gen_cox_balls(spec, w, dim, seed);
  if (s.generator.empty_region) std::cerr << "warning: no ball meets the window; sample is empty\n";
  return s;
}

void run_generate(const GenerateArgs& a) {
  if (a.seeds.empty()) {
    io::write_sample(a.out, generate_one(a, a.seed));
    return;
  }
  const auto [lo, hi] = parse_seed_range(a.seeds);
  with_seed(a.out, lo);  // validate the pattern up front
  parallel_for(hi - lo + 1, [&](std::size_t i) {
    const std::uint64_t s = lo + i;
    io::write_sample(with_seed(a.out, s), generate_one(a, s));
  });
}

struct ClusterArgs {
  std::string input;
  std::string metric = "euclidean";
  std::size_t max_levels = kDefaultMaxLevels;
  std::string out;
  std::string newick;
};

void run_cluster(const ClusterArgs& a) {
  const Sample s = io::read_sample(a.input);
  const Hierarchy h = build_hierarchy(s, parse_metric(a.metric, s.window), a.max_levels);
  io::write_hierarchy(a.out, h);
  if (!a.newick.empty()) io::write_text(a.newick, io::to_newick(h) + "\n");
  std::cout << "levels " << h.levels.size() << " termination " << to_string(h.termination) << '\n';
}

struct BaselineArgs {
  std::string window;
  std::uint64_t count = 0;
  std::size_t n_seeds = 20;
  std::uint64_t seed = 0;
  std::string metric = "euclidean";
  std::string match;
  std::string out;
};

void run_baseline(const BaselineArgs& a) {
  if (a.match.empty() && (a.window.empty() || a.count == 0)) throw UsageError("baseline needs --window and --count, or --match");
  std::optional<Sample> match;
  if (!a.match.empty()) match = io::read_sample(a.match);
  const Window w = match ? match->window : parse_window(a.window);
  const std::uint64_t count = match ? match->size() : a.count;
  const auto b = poisson_baseline(w, count, a.n_seeds, parse_metric(a.metric, w), a.seed);
  std::ostringstream out;
  out << "level,mean_merge_distance,contributors\n";
  for (std::size_t k = 0; k < b.mean.size(); ++k) {
    out << k << ',' << io::format_double(b.mean[k]) << ',' << b.contributors[k] << '\n';
  }
  io::write_text(a.out, out.str());
}

struct DetectArgs {
  std::string target;
  std::string baseline;
  double tau = 0.3;
  std::string out;
  bool all = false;
};

void run_detect(const DetectArgs& a) {
  const Detection d = detect_aggregation(read_series(a.target), read_series(a.baseline), DetectorConfig{a.tau, 1});
  if (!a.out.empty()) io::write_text(a.out, io::detector_csv(d));
  if (d.level) {
    std::cout << "detected level " << *d.level << '\n';
  } else {
    std::cout << to_string(d.status) << '\n';
  }
  if (a.all && !d.flagged.empty()) {
    std::cout << "flagged";
    for (auto k : d.flagged) std::cout << ' ' << k;
    std::cout << '\n';
  }
}

struct ChainsArgs {
  std::string mode;
  double lambda = 1.0;
  double R = 1.0;
  std::size_t dim = 2;
  std::vector<std::size_t> n{2};
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  std::string seeds;
  std::string out;
};

void run_chains(const ChainsArgs& a) {
  std::ostringstream out;
  out << "n,closed_form,recursive,mc_mean,mc_stderr,trials,seed\n";
  std::vector<std::uint64_t> seeds{a.seed};
  if (!a.seeds.empty()) {
    const auto [lo, hi] = parse_seed_range(a.seeds);
    seeds.clear();
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  for (std::size_t n : a.n) {
    const double closed = chains::expected_chain_count_closed_form(a.lambda, a.R, a.dim, n);
    const double rec = chains::expected_chain_count_recursive(a.lambda, a.R, a.dim, n);
    if (a.mode == "formula") {
      out << n << ',' << io::format_double(closed) << ',' << io::format_double(rec) << ",,,,\n";
      continue;
    }
    for (auto s : seeds) {
      const auto est = chains::mc_chain_count(chains::ChainCountConfig{a.lambda, a.R, a.dim, n, a.trials, s});
      out << n << ',' << io::format_double(closed) << ',' << io::format_double(rec) << ',' << io::format_double(est.mean)
          << ',' << io::format_double(est.std_error) << ',' << est.trials << ',' << s << '\n';
    }
  }
  if (a.out.empty()) {
    std::cout << out.str();
  } else {
    io::write_text(a.out, out.str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustroid hierarchical nearest-neighbour clustering of point samples"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "chn2 0.1.0");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a seeded point sample as JSON");
  g->add_option("kind", gen.kind, "Generator: poisson, binomial or cox")->required()->check(CLI::IsMember({"poisson", "binomial", "cox"}));
  g->add_option("--window", gen.window, "Window as lo per axis then hi per axis, e.g. 0,0,200,200")->required();
  g->add_option("--lambda", gen.lambda, "Intensity (poisson, cox)");
  g->add_option("--count", gen.count, "Number of points (binomial)");
  g->add_option("--dim", gen.dim, "Dimension (defaults to the window's)");
  g->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  g->add_option("--seeds", gen.seeds, "Seed range a..b; --out must then contain {seed}");
  g->add_option("--centers", gen.centers, "Ball centers as x,y;x,y (cox, fixed mode)");
  g->add_option("--radii", gen.radii, "Ball radii as r1,r2,... (cox, fixed mode)");
  g->add_option("--center-intensity", gen.center_intensity, "Intensity of random ball centers (cox, random mode)");
  g->add_option("--radius-range", gen.radius_range, "rmin,rmax for random radii (cox, random mode)");
  g->add_option("--out", gen.out, "Output sample JSON")->required();
  g->callback([&] { run_generate(gen); });

  ClusterArgs cl;
  auto* c = app.add_subcommand("cluster", "Build the hierarchy of a sample");
  c->add_option("--input", cl.input, "Sample JSON")->required();
  c->add_option("--metric", cl.metric, "euclidean or torus")->capture_default_str()->check(CLI::IsMember({"euclidean", "torus"}));
  c->add_option("--max-levels", cl.max_levels, "Level cap")->capture_default_str();
  c->add_option("--out", cl.out, "Output hierarchy JSON")->required();
  c->add_option("--newick", cl.newick, "Also write the pair tree in Newick form");
  c->callback([&] { run_cluster(cl); });

  std::string stats_in, stats_out;
  auto* st = app.add_subcommand("stats", "Per-level statistics of a hierarchy as CSV");
  st->add_option("--hierarchy", stats_in, "Hierarchy JSON")->required();
  st->add_option("--out", stats_out, "Output CSV")->required();
  st->callback([&] { io::write_text(stats_out, io::levels_csv(level_stats(io::read_hierarchy(stats_in)))); });

  BaselineArgs bl;
  auto* b = app.add_subcommand("baseline", "Mean merge distances of fixed-count uniform samples, averaged by level");
  b->add_option("--window", bl.window, "Window as lo per axis then hi per axis");
  b->add_option("--count", bl.count, "Points per sample");
  b->add_option("--match", bl.match, "Take window and count from this sample JSON");
  b->add_option("--n-seeds", bl.n_seeds, "Number of samples")->capture_default_str();
  b->add_option("--seed", bl.seed, "Master seed")->capture_default_str();
  b->add_option("--metric", bl.metric, "euclidean or torus")->capture_default_str()->check(CLI::IsMember({"euclidean", "torus"}));
  b->add_option("--out", bl.out, "Output CSV")->required();
  b->callback([&] { run_baseline(bl); });

  DetectArgs dt;
  auto* d = app.add_subcommand("detect", "Compare a target against a baseline and report the first jump level");
  d->add_option("--target", dt.target, "Target levels or series CSV")->required();
  d->add_option("--baseline", dt.baseline, "Baseline levels or series CSV")->required();
  d->add_option("--tau", dt.tau, "Relative jump threshold")->capture_default_str();
  d->add_option("--out", dt.out, "Per-level detector CSV");
  d->add_flag("--all", dt.all, "Also list every flagged level");
  d->callback([&] { run_detect(dt); });

  ChainsArgs ch;
  auto* k = app.add_subcommand("chains", "Expected second-order descending chain counts");
  k->add_option("mode", ch.mode, "formula or mc")->required()->check(CLI::IsMember({"formula", "mc"}));
  k->add_option("--lambda", ch.lambda, "Intensity")->capture_default_str();
  k->add_option("--R", ch.R, "Step radius")->capture_default_str();
  k->add_option("--dim", ch.dim, "Dimension")->capture_default_str();
  k->add_option("--n", ch.n, "Chain length(s)")->capture_default_str()->delimiter(',');
  k->add_option("--trials", ch.trials, "Monte-Carlo trials")->capture_default_str();
  k->add_option("--seed", ch.seed, "Seed")->capture_default_str();
  k->add_option("--seeds", ch.seeds, "Seed range a..b, one row per seed");
  k->add_option("--out", ch.out, "Output CSV (stdout if omitted)");
  k->callback([&] { run_chains(ch); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "chn2: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
