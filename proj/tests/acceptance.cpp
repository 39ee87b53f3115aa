// Acceptance suite: one PASS/FAIL line per criterion.
//
//   culture_acceptance [criterion...]
//
// With no arguments every criterion runs. The exit status is 0 only when all
// requested criteria pass.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "culture/cli.hpp"
#include "culture/influence.hpp"
#include "culture/similarity.hpp"
#include "culture/socialcorr.hpp"
#include "culture/stat.hpp"
#include "culture/synthgen.hpp"
#include "culture/trends.hpp"

using namespace culture;

namespace {

constexpr int kSeeds = 20;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// --- synthgen scenarios -------------------------------------------------------

struct SeedStats {
  double d_corr = 0.0, d_corr_t = 0.0, d_corr_p = 1.0;
  double shuffle_mean = 0.0, shuffle_se = 0.0, shuffle_p = 1.0;
  double pme_mean = 0.0, pme_t = 0.0, pme_p = 1.0;
  std::size_t matches = 0, bad_matches = 0;
};

SeedStats run_seed(double h, double lambda, std::uint64_t seed) {
  synth::GenConfig cfg;
  cfg.homophily = h;
  cfg.influence = lambda;
  cfg.seed = seed;
  const auto ds = synth::generate(cfg);
  const auto& log = ds.events.log;
  const auto& graph = ds.network.graph;
  SeedStats s;

  const auto triples = socialcorr::sample_triples(graph, ds.network.profiles, seed).triples;
  const socialcorr::UserVectors vectors(log, ds.catalog, log.span_window());
  const auto corr = socialcorr::social_correlation(triples, vectors, std::nullopt);
  s.d_corr = corr.d_corr;
  s.d_corr_t = corr.test.statistic;
  s.d_corr_p = corr.test.p_value;

  std::vector<ConceptId> concepts(cfg.n_concepts);
  std::iota(concepts.begin(), concepts.end(), 0);
  influence::ShuffleOptions so;
  so.min_adopters = 10;
  so.permutations = 1;
  so.seed = seed;
  const auto sh = influence::shuffle_test(log, graph, concepts, so);
  s.shuffle_mean = sh.mean_difference;
  s.shuffle_se = sh.se_difference;
  s.shuffle_p = sh.test ? sh.test->p_value : 1.0;

  influence::PmeOptions po;
  po.split = cfg.start + 52 * kSecondsPerWeek;
  po.pre_length = 26 * kSecondsPerWeek;
  po.post_window = {cfg.start + 78 * kSecondsPerWeek, cfg.start + 104 * kSecondsPerWeek};
  po.pool_size = 50;
  po.seed = seed;
  const auto pme = influence::pme_influence(log, graph, ds.network.profiles, po);
  s.pme_mean = pme.mean;
  s.pme_t = pme.test.statistic;
  s.pme_p = pme.test.p_value;
  for (const auto& m : pme.matches) {
    ++s.matches;
    if (!(m.jaccard > influence::kMatchJaccard && m.size_gap < influence::kMatchSizeGap)) ++s.bad_matches;
  }
  return s;
}

std::vector<SeedStats> run_scenario(double h, double lambda) {
  std::vector<SeedStats> out;
  for (int sd = 1; sd <= kSeeds; ++sd) out.push_back(run_seed(h, lambda, static_cast<std::uint64_t>(sd)));
  return out;
}

bool within_2se_dcorr(const SeedStats& s) { return std::abs(s.d_corr_t) <= 2.0; }
bool within_2se_shuffle(const SeedStats& s) { return std::abs(s.shuffle_mean) <= 2.0 * s.shuffle_se; }
bool within_2se_pme(const SeedStats& s) { return std::abs(s.pme_t) <= 2.0; }

int count_if(const std::vector<SeedStats>& v, const std::function<bool(const SeedStats&)>& f) {
  return static_cast<int>(std::count_if(v.begin(), v.end(), f));
}

Verdict null_calibration() {
  const auto v = run_scenario(0.0, 0.0);
  const int dc = count_if(v, within_2se_dcorr), sh = count_if(v, within_2se_shuffle), pm = count_if(v, within_2se_pme);
  return {dc >= 18 && sh >= 18 && pm >= 18,
          fmt("within 2 SE of 0: D_corr %d/20, shuffle difference %d/20, PME Inf %d/20 (need >= 18 each)", dc, sh, pm)};
}

Verdict shuffle_detection() {
  const auto v = run_scenario(0.0, 1.0);
  const int ok = count_if(v, [](const SeedStats& s) { return s.shuffle_mean > 0 && s.shuffle_p < 0.01; });
  double worst = 0.0;
  for (const auto& s : v) worst = std::max(worst, s.shuffle_p);
  return {ok >= 18, fmt("alpha_orig > alpha_shuf with p < 0.01 in %d/20 seeds (need >= 18), max p %.3g", ok, worst)};
}

Verdict homophily_only() {
  const auto v = run_scenario(5.0, 0.0);
  const int dc = count_if(v, [](const SeedStats& s) { return s.d_corr > 0 && s.d_corr_p < 0.01; });
  const int sh = count_if(v, within_2se_shuffle), pm = count_if(v, within_2se_pme);
  const int all = count_if(v, [](const SeedStats& s) {
    return s.d_corr > 0 && s.d_corr_p < 0.01 && within_2se_shuffle(s) && within_2se_pme(s);
  });
  return {all >= 16, fmt("all three hold in %d/20 seeds (need >= 16); D_corr > 0 p < 0.01 %d/20, "
                         "shuffle within 2 SE %d/20, PME within 2 SE %d/20",
                         all, dc, sh, pm)};
}

Verdict pme_detection() {
  const auto v = run_scenario(2.0, 1.0);
  const int ok = count_if(v, [](const SeedStats& s) { return s.pme_mean > 0 && s.pme_p < 0.01; });
  std::size_t matches = 0, bad = 0;
  for (const auto& s : v) matches += s.matches, bad += s.bad_matches;
  return {ok >= 18 && bad == 0 && matches > 0,
          fmt("mean Inf > 0 with p < 0.01 in %d/20 seeds (need >= 18); %zu/%zu match rows satisfy J > 0.9 and N < 0.1",
              ok, matches - bad, matches)};
}

// --- trend clustering -----------------------------------------------------------

Verdict trend_clustering() {
  bool pass = true;
  double worst_purity = 1.0, worst_contamination = 0.0;
  int split_shapes = 0;
  for (std::uint64_t sd = 1; sd <= 5; ++sd) {
    synth::TrendCorpusConfig cfg;
    cfg.noise = 0.05;
    cfg.seed = sd;
    const auto corpus = synth::gen_trend_corpus(cfg);
    const auto n = corpus.series.size();

    auto tally = [&](const trends::TrendClustering& c, std::size_t k) {
      std::vector<std::map<synth::Shape, std::size_t>> t(k);
      for (std::size_t i = 0; i < n; ++i) ++t[c.cluster[i]][corpus.labels[i]];
      return t;
    };
    auto majority = [](const std::map<synth::Shape, std::size_t>& m) {
      return std::max_element(m.begin(), m.end(), [](auto& a, auto& b) { return a.second < b.second; });
    };

    const auto c3 = trends::cluster_trends(corpus.series, 3, sd);
    std::size_t agree = 0;
    for (const auto& m : tally(c3, 3)) {
      if (!m.empty()) agree += majority(m)->second;
    }
    const double purity = static_cast<double>(agree) / static_cast<double>(n);
    worst_purity = std::min(worst_purity, purity);
    pass = pass && purity >= 0.95;

    const auto c7 = trends::cluster_trends(corpus.series, trends::kDefaultTrendClusters, sd);
    std::map<synth::Shape, std::size_t> owned;
    for (const auto& m : tally(c7, trends::kDefaultTrendClusters)) {
      if (m.empty()) continue;
      std::size_t size = 0;
      for (const auto& [shape, count] : m) size += count;
      const auto top = majority(m);
      const double contamination = 1.0 - static_cast<double>(top->second) / static_cast<double>(size);
      worst_contamination = std::max(worst_contamination, contamination);
      pass = pass && contamination <= 0.05;
      owned[top->first] += top->second;
    }
    // Every shape must own the clusters holding nearly all of its series.
    for (const auto& [shape, count] : cfg.per_shape) {
      if (static_cast<double>(owned[shape]) < 0.95 * static_cast<double>(count)) {
        ++split_shapes;
        pass = false;
      }
    }
  }
  return {pass, fmt("5 corpora: K=3 min purity %.3f (need >= 0.95); K=7 max cluster contamination %.3f "
                    "(need <= 0.05), shapes not recovered %d",
                    worst_purity, worst_contamination, split_shapes)};
}

// --- similarity and embedding -------------------------------------------------------

std::size_t nearest(const std::vector<similarity::EmbeddedPoint>& p, std::size_t i) {
  std::size_t best = i;
  double bd = INFINITY;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double d = (p[i].x - p[j].x) * (p[i].x - p[j].x) + (p[i].y - p[j].y) * (p[i].y - p[j].y);
    if (j != i && d < bd) bd = d, best = j;
  }
  return best;
}

similarity::RegionVectorSet planted_blocks(std::uint64_t seed, std::string label) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 0.15);
  std::array<std::vector<double>, 2> proto = {std::vector<double>{0.8, 0.7, 0.6, 0.1, 0.05, 0.1, 0.05, 0.1},
                                              std::vector<double>{0.05, 0.1, 0.1, 0.7, 0.8, 0.6, 0.1, 0.05}};
  similarity::RegionVectorSet s;
  s.period_label = std::move(label);
  for (int r = 0; r < 16; ++r) {
    auto v = proto[r / 8];
    for (auto& x : v) x += jitter(rng);
    s.regions.push_back(fmt("%c%02d", r < 8 ? 'A' : 'B', r));
    s.vectors.push_back(v);
    s.counts.push_back(1000);
  }
  return s;
}

Verdict similarity_embedding() {
  bool exact = true, pure = true, mutual = true;
  double min_purity = 1.0;
  for (std::uint64_t sd = 1; sd <= 5; ++sd) {
    const auto blocks = planted_blocks(sd, "2014");
    const auto m = similarity::similarity_matrix(blocks);
    for (std::size_t i = 0; i < m.regions.size(); ++i) {
      exact = exact && m.values(i, i) == 1.0;
      for (std::size_t j = 0; j < m.regions.size(); ++j) exact = exact && m.values(i, j) == m.values(j, i);
    }
    stat::TsneOptions o;
    o.seed = sd;
    const auto pts = similarity::embed_regions(m, o);
    std::size_t same = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) same += pts[nearest(pts, i)].region[0] == pts[i].region[0];
    const double purity = static_cast<double>(same) / static_cast<double>(pts.size());
    min_purity = std::min(min_purity, purity);
    pure = pure && purity == 1.0;

    // Second period: fresh jitter for every region except A03, which repeats.
    auto later = planted_blocks(sd + 100, "2015");
    later.vectors[3] = blocks.vectors[3];
    const std::vector<similarity::RegionVectorSet> sets = {blocks, later};
    const auto joint = similarity::embed_regions(similarity::similarity_matrix(sets), o);
    const std::size_t a = 3, b = blocks.regions.size() + 3;
    mutual = mutual && nearest(joint, a) == b && nearest(joint, b) == a;
  }
  return {exact && pure && mutual,
          fmt("5 layouts: exact symmetry and unit diagonal %s; min NN block purity %.3f (need 1.0); "
              "duplicate region mutual NN %s",
              exact ? "yes" : "no", min_purity, mutual ? "yes" : "no")};
}

// --- numerical kernels ------------------------------------------------------------

Verdict numerical_kernels() {
  // Exposure counts log-uniform so ln(a+1) spans [0, 12] and p runs from 0.05 to 0.95.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::int64_t> a(100000);
  std::vector<int> y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<std::int64_t>(std::floor(std::exp(12.0 * u(rng)))) - 1;
    const double p = 1.0 / (1.0 + std::exp(-(0.5 * std::log1p(static_cast<double>(a[i])) - 3.0)));
    y[i] = u(rng) < p ? 1 : 0;
  }
  const auto cells = stat::aggregate_exposures(a, y);
  const auto fit = stat::fit_logistic(cells);
  const bool logistic_ok = fit.converged && std::abs(fit.alpha - 0.5) <= 0.05 && std::abs(fit.beta + 3.0) <= 0.05;

  double worst_rel = 0.0;
  const double h = 1e-5, ridge = 1e-6;
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double al = coef(rng), be = coef(rng) - 2.0;
    const auto g = stat::logistic_gradient(cells, al, be, ridge);
    const double fa = (stat::logistic_objective(cells, al + h, be, ridge) - stat::logistic_objective(cells, al - h, be, ridge)) / (2 * h);
    const double fb = (stat::logistic_objective(cells, al, be + h, ridge) - stat::logistic_objective(cells, al, be - h, ridge)) / (2 * h);
    worst_rel = std::max({worst_rel, std::abs(fa - g[0]) / std::max(1.0, std::abs(g[0])),
                          std::abs(fb - g[1]) / std::max(1.0, std::abs(g[1]))});
  }
  const bool gradient_ok = worst_rel <= 1e-6;

  const double d = stat::dtw(std::vector<double>{0, 1, 2}, std::vector<double>{0, 2});
  const double j = stat::jaccard(ConceptSet{0, 1, 2}, ConceptSet{1, 2, 3});
  const double r = stat::pearson(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{2, 1, 4, 3, 6}).statistic;
  const bool pearson_ok = std::abs(r - 0.8) <= 1e-6;

  std::cout << fmt("  logistic (alpha, beta) = (%.4f, %.4f), target (0.5, -3) +/- 0.05: %s\n", fit.alpha, fit.beta,
                   logistic_ok ? "PASS" : "FAIL");
  std::cout << fmt("  gradient vs central differences: max rel error %.2e (need <= 1e-6): %s\n", worst_rel,
                   gradient_ok ? "PASS" : "FAIL");
  std::cout << fmt("  dtw([0,1,2],[0,2]) = %.17g (need 1): %s\n", d, d == 1.0 ? "PASS" : "FAIL");
  std::cout << fmt("  jaccard({a,b,c},{b,c,d}) = %.17g (need 0.5): %s\n", j, j == 0.5 ? "PASS" : "FAIL");
  std::cout << fmt("  pearson(x=[1..5], y=[2,1,4,3,6]) = %.9f (need 0.8 +/- 1e-6): %s\n", r,
                   pearson_ok ? "PASS" : "FAIL");
  const bool pass = logistic_ok && gradient_ok && d == 1.0 && j == 0.5 && pearson_ok;
  return {pass, pearson_ok ? std::string("all kernels match")
                           : fmt("pearson r on the stated data is %.6f, not 0.8; other kernels %s", r,
                                 logistic_ok && gradient_ok && d == 1.0 && j == 0.5 ? "pass" : "FAIL")};
}

// --- determinism --------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[e.path().filename().string()] = ss.str();
  }
  return files;
}

int invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  if (status != 0) std::cerr << err.str();
  return status;
}

Verdict determinism() {
  const auto root = std::filesystem::temp_directory_path() / "culture_acceptance_determinism";
  std::filesystem::remove_all(root);
  const auto data = root / "data";
  const std::vector<std::string> synth = {"synth", "--homophily", "2", "--influence", "1", "--seed", "3"};
  const std::vector<std::string> inputs = {"--events",  (data / "events.jsonl").string(),
                                           "--catalog", (data / "catalog.csv").string(),
                                           "--graph",   (data / "graph.txt").string(),
                                           "--profiles", (data / "profiles.csv").string()};
  struct Case {
    std::string name;
    std::vector<std::string> args;
  };
  auto with_inputs = [&](std::vector<std::string> a) {
    a.insert(a.end(), inputs.begin(), inputs.end());
    a.push_back("--plots");
    return a;
  };
  const std::vector<Case> cases = {
      {"synth", synth},
      {"trends", with_inputs({"trends", "--regions", "all"})},
      {"similarity", with_inputs({"similarity", "--periods", "2014=2014-01-06/2015-01-05,2015=2015-01-05/2016-01-04"})},
      {"corr", with_inputs({"corr", "--hist_concepts", "baseball,bear"})},
      {"shuffle", with_inputs({"shuffle", "--min_adopters", "10"})},
      {"pme", with_inputs({"pme", "--split", "2015-01-05", "--pool_size", "50"})},
  };
  auto run_into = [&](const Case& c, const std::filesystem::path& out, const char* threads) {
    auto a = c.args;
    a.insert(a.end(), {"--out", out.string(), "--threads", threads});
    return invoke(a) == 0;
  };

  std::vector<std::string> problems;
  std::size_t compared = 0;
  for (const auto& c : cases) {
    const auto first_dir = c.name == "synth" ? data : root / (c.name + "_1");
    if (!run_into(c, first_dir, "1")) {
      problems.push_back(c.name + " failed to run");
      continue;
    }
    const auto first = snapshot(first_dir);
    const auto again_dir = root / (c.name + "_again");
    if (!run_into(c, first_dir, "1") || snapshot(first_dir) != first) problems.push_back(c.name + " re-run differs");
    if (!run_into(c, again_dir, "4")) {
      problems.push_back(c.name + " failed with 4 threads");
      continue;
    }
    const auto parallel = snapshot(again_dir);
    if (parallel.size() != first.size()) problems.push_back(c.name + " parallel file set differs");
    for (const auto& [name, bytes] : first) {
      ++compared;
      const auto it = parallel.find(name);
      if (it == parallel.end()) continue;
      bool same = bytes == it->second;
      if (!same && name.ends_with(".json")) {
        // The config echo records the output directory and thread count.
        auto x = nlohmann::json::parse(bytes), z = nlohmann::json::parse(it->second);
        x.erase("config");
        z.erase("config");
        same = x == z;
      }
      if (!same) problems.push_back(c.name + "/" + name + " differs between 1 and 4 threads");
    }
  }
  std::filesystem::remove_all(root);
  std::string detail = fmt("%zu artifacts across %zu subcommands re-run and compared at 1 vs 4 threads", compared,
                           cases.size());
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

struct Criterion {
  int id;
  const char* title;
  Verdict (*fn)();
};

const Criterion kCriteria[] = {
    {1, "null calibration", null_calibration},
    {2, "influence detection (shuffle)", shuffle_detection},
    {3, "homophily-only rejection", homophily_only},
    {4, "influence detection (PME)", pme_detection},
    {5, "trend clustering", trend_clustering},
    {6, "similarity and embedding", similarity_embedding},
    {7, "numerical kernels", numerical_kernels},
    {8, "determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > 8) {
      std::cerr << "usage: culture_acceptance [1-8 ...]\n";
      return 2;
    }
    wanted.push_back(id);
  }
  if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7, 8};

  bool all = true;
  for (const auto& c : kCriteria) {
    if (std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << c.id << " (" << c.title << "): " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail
              << fmt(" [%.1fs]", secs) << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
