// kls: key-leakage-storage region calculator.
//
// Exit codes: 0 success / member / certified, 1 non-member / not certified,
// 2 usage, input or resource errors.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kls/binning.hpp"
#include "kls/boundary.hpp"
#include "kls/channels.hpp"
#include "kls/errors.hpp"
#include "kls/io.hpp"
#include "kls/polysys.hpp"
#include "kls/regions.hpp"

namespace fs = std::filesystem;
using namespace kls;

namespace {

// Applies --config keys onto bound variables; unknown keys are errors.
class ConfigBinder {
 public:
  void bind(const std::string& key, std::function<void(const Json&)> set) { setters_[key] = std::move(set); }

  template <class T>
  void bind_value(const std::string& key, T& target) {
    bind(key, [&target](const Json& j) { target = j.get<T>(); });
  }

  template <class T>
  void bind_optional(const std::string& key, std::optional<T>& target) {
    bind(key, [&target](const Json& j) { target = j.get<T>(); });
  }

  void apply(const std::string& path) const {
    const Json j = read_json_file(path);
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      auto s = setters_.find(it.key());
      if (s == setters_.end()) throw UsageError("config file: unknown key '" + it.key() + "'");
      try {
        s->second(it.value());
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file: bad value for '" + it.key() + "': " + e.what());
      }
    }
  }

 private:
  std::map<std::string, std::function<void(const Json&)>> setters_;
};

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

std::string format_param(const char* prefix, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.6g", prefix, v);
  return buf;
}

// ---- classify ----

struct ClassifyArgs {
  std::string channel;
  std::size_t grid = 20;
  std::size_t aux_card = 0;
  double tol = 1e-9;
};

int run_classify(const ClassifyArgs& a) {
  const auto sys = channel_from_json(read_json_file(a.channel));
  Json ents = Json::array();
  for (std::size_t j = 0; j < sys.entity_count(); ++j) {
    Json e = to_json(classify(sys, j, a.grid, a.aux_card, a.tol));
    e["entity"] = j + 1;
    ents.push_back(e);
  }
  print({{"entities", ents}});
  return 0;
}

// ---- region ----

struct RegionArgs {
  std::string channel, aux, rates;
  std::string model = "gs", setting = "multi", bound = "inner";
  double tol = kMembershipTol;
  std::size_t grid = 20;
};

int run_region(const RegionArgs& a) {
  const auto sys = channel_from_json(read_json_file(a.channel));
  const auto aux = aux_from_json(read_json_file(a.aux));
  const auto rates = rates_from_json(read_json_file(a.rates));
  const Model model = parse_model(a.model);
  const Setting setting = parse_setting(a.setting);
  const Bound bound = parse_bound(a.bound);

  InfoRecord rec;
  if (aux.coupling) {
    if (setting != Setting::two_enrollment || bound != Bound::outer) {
      throw UsageError("a coupling is only accepted for --setting two --bound outer");
    }
    rec = info_record_from_coupling(sys, *aux.coupling);
  } else {
    rec = info_record(sys, aux.aux);
  }

  MembershipReport rep;
  if (setting == Setting::two_enrollment) {
    rep = eval_two_enrollment(rec, rates, model, bound, a.tol);
  } else if (bound == Bound::inner) {
    rep = eval_multi_entity_inner(rec, rates, model, a.tol);
  } else {
    std::vector<ChannelClass> classes;
    for (std::size_t j = 0; j < sys.entity_count(); ++j) classes.push_back(classify(sys, j, a.grid));
    rep = eval_pd_ln_outer(rec, rates, model, classes, a.tol);
  }
  print(to_json(rep));
  return rep.member ? 0 : 1;
}

// ---- sweep ----

struct SweepArgs {
  std::optional<double> p_a, snr_db;
  std::string mode = "compare";
  std::size_t grid = kDefaultSweepGrid;
  std::string out = ".";
  bool asymmetric = false;
};

int run_sweep(const SweepArgs& a) {
  if (a.p_a.has_value() == a.snr_db.has_value()) throw UsageError("give exactly one of --p_A and --snr_db");
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec || !fs::is_directory(a.out)) throw UsageError("cannot create output directory '" + a.out + "'");
  const std::string param = a.p_a ? format_param("pA", *a.p_a) : format_param("snr", *a.snr_db);
  Json summary = {{"mode", a.mode}, {"grid", a.grid}};
  if (a.p_a) summary["p_A"] = sig12(*a.p_a);
  if (a.snr_db) summary["snr_db"] = sig12(*a.snr_db);
  Json files = Json::array();
  auto emit = [&](const std::vector<CurvePoint>& pts, EnrollmentMode m, const std::string& p) {
    const auto path = (fs::path(a.out) / curve_file_name(m, p)).string();
    write_curve_csv(path, pts, m);
    files.push_back(path);
  };

  if (a.mode == "compare") {
    Comparison c;
    std::string ref_param = param;
    if (a.p_a) {
      c = compare_single_vs_two(*a.p_a, a.grid);
      summary["metric"] = "leakage_reduction_percent";
    } else {
      c = compare_single_vs_two_snr(*a.snr_db, a.grid);
      ref_param = format_param("snr", *a.snr_db + 10.0 * std::log10(2.0));
      summary["metric"] = "corner_key_gain_percent";
    }
    emit(c.reference_curve, c.reference.mode, ref_param);
    emit(c.candidate_curve, c.candidate.mode, param);
    summary["comparison"] = to_json(c);
  } else {
    SweepSpec spec;
    spec.p_a = a.p_a;
    spec.snr_db = a.snr_db;
    spec.grid = a.grid;
    spec.mode = parse_enrollment_mode(a.mode);
    spec.asymmetric = a.asymmetric;
    const auto pts = sweep_boundary(spec);
    summary["p_A_resolved"] = sig12(spec_crossover(spec));
    emit(pts, spec.mode, param);
  }
  summary["files"] = files;
  const auto spath = (fs::path(a.out) / "summary.json").string();
  write_json_file(spath, summary);
  print(summary);
  return 0;
}

// ---- fme ----

struct FmeArgs {
  std::string channel, aux;
  std::optional<std::string> reduced;
  std::optional<std::string> dump_reduced;
  double tol = 1e-9;
};

int run_fme(const FmeArgs& a) {
  const auto sys = channel_from_json(read_json_file(a.channel));
  const auto aux = aux_from_json(read_json_file(a.aux));
  if (sys.entity_count() != 2) throw UsageError("fme needs a two-entity system");
  const auto rec = info_record(sys, aux.aux);
  const auto raw = build_theorem2_osrb(rec);
  const auto built_reduced = build_theorem2_reduced(rec);
  if (a.dump_reduced) write_json_file(*a.dump_reduced, to_json(built_reduced));
  const auto reduced = a.reduced ? system_from_json(read_json_file(*a.reduced)) : built_reduced;

  bool ok = true;
  Json out;
  const auto proj = project_and_compare_report(raw, {"Rc1", "Rc2"}, reduced, a.tol);
  ok = ok && proj.equal && proj.lifted_check;
  out["projection"] = {{"equal", proj.equal},
                       {"projected_rows", proj.projected_rows},
                       {"lifted_check", proj.lifted_check},
                       {"vertices_extend", proj.vertices_extend},
                       {"reduced_not_implied", proj.reduced_not_implied},
                       {"projected_not_implied", proj.projected_not_implied}};
  ok = ok && proj.vertices_extend;

  const auto sym = check_symmetric_record(rec);
  out["symmetric"] = {{"met", sym.symmetric}, {"detail", sym.reason}};
  if (sym.symmetric) {
    Json certs = Json::array();
    for (const auto& label : claimed_inactive_labels()) {
      if (!reduced.has_row(label)) {
        ok = false;
        certs.push_back({{"label", label}, {"error", "missing from reduced system"}});
        continue;
      }
      const auto c = certify_redundancy(reduced, label, a.tol);
      ok = ok && c.redundant;
      certs.push_back(to_json(c));
    }
    out["inactive"] = certs;
    const auto corner = reduced_corner(rec);
    const bool corner_vertex = is_vertex(reduced, corner);
    ok = ok && corner_vertex;
    out["corner"] = {{"point", Json::array({sig12(corner[0]), sig12(corner[1]), sig12(corner[2]), sig12(corner[3])})},
                     {"is_vertex", corner_vertex}};
    const auto cr = verify_corner_replacement(rec);
    ok = ok && cr.corner_shared();
    out["corner_replacement"] = {{"corner_shared", cr.corner_shared()},
                                 {"vertex_sets_equal", cr.vertex_sets_equal},
                                 {"original_vertices", cr.original_vertices},
                                 {"replaced_vertices", cr.replaced_vertices}};
  }
  const auto js = joint_secrecy_diagnostic(rec, a.tol);
  out["joint_secrecy_diagnostic"] = {{"max_total_key", sig12(js.max_total_key)},
                                     {"max_total_key_split", sig12(js.max_total_key_split)},
                                     {"positive_keys_feasible", js.positive_keys_feasible}};
  out["certified"] = ok;
  print(out);
  return ok ? 0 : 1;
}

// ---- sim ----

struct SimArgs {
  std::string channel;
  std::size_t n = 4;
  double rs = 0.0, rw = 0.0, rc = 0.0;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  bool injective = false;
  std::vector<std::size_t> trend;
  std::optional<std::string> csv;
  bool one_time_pad = false;
};

int run_sim(const SimArgs& a) {
  const auto sys = channel_from_json(read_json_file(a.channel));
  const BinRates r{a.rs, a.rw, a.rc};
  if (!a.trend.empty()) {
    const auto rep = trend_check(sys, r, a.trend, a.trials, a.seed);
    if (a.csv) write_trend_csv(*a.csv, rep);
    print(to_json(rep));
    return 0;
  }
  BinningConfig cfg;
  cfg.n = a.n;
  cfg.rates.assign(sys.entity_count(), r);
  cfg.seed = a.seed;
  cfg.trials = a.trials;
  cfg.injective = a.injective;
  Json out = to_json(run_binning(sys, cfg));
  if (a.one_time_pad) out["one_time_pad"] = to_json(one_time_pad_check(sys, cfg));
  print(out);
  return 0;
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const ResourceError& e) {
    std::cerr << "kls: resource limit: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "kls: error: " << e.what() << '\n';
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key-leakage-storage region calculator"};
  app.require_subcommand(1);
  std::optional<std::string> config;

  ClassifyArgs ca;
  ConfigBinder cb_classify;
  auto* classify_cmd = app.add_subcommand("classify", "Classify each entity's broadcast channel");
  classify_cmd->add_option("channel", ca.channel, "Channel JSON file")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--grid", ca.grid, "Less-noisy grid resolution")->capture_default_str();
  classify_cmd->add_option("--aux-card", ca.aux_card, "Aux cardinality (0: |X~|+1)")->capture_default_str();
  classify_cmd->add_option("--tol", ca.tol, "Tolerance")->capture_default_str();
  classify_cmd->add_option("--config", config, "JSON file overriding the flags");
  cb_classify.bind_value("grid", ca.grid);
  cb_classify.bind_value("aux_card", ca.aux_card);
  cb_classify.bind_value("tol", ca.tol);

  RegionArgs ra;
  ConfigBinder cb_region;
  auto* region_cmd = app.add_subcommand("region", "Check a rate tuple against a region bound");
  region_cmd->add_option("channel", ra.channel, "Channel JSON file")->required();
  region_cmd->add_option("aux", ra.aux, "Aux JSON file")->required();
  region_cmd->add_option("rates", ra.rates, "Rates JSON file")->required();
  region_cmd->add_option("--model", ra.model, "gs|cs")->check(CLI::IsMember({"gs", "cs"}))->capture_default_str();
  region_cmd->add_option("--setting", ra.setting, "multi|two")->check(CLI::IsMember({"multi", "two"}))->capture_default_str();
  region_cmd->add_option("--bound", ra.bound, "inner|outer")->check(CLI::IsMember({"inner", "outer"}))->capture_default_str();
  region_cmd->add_option("--tol", ra.tol, "Membership tolerance (bits)")->capture_default_str();
  region_cmd->add_option("--grid", ra.grid, "Less-noisy grid resolution for outer bounds")->capture_default_str();
  region_cmd->add_option("--config", config, "JSON file overriding the flags");
  cb_region.bind_value("model", ra.model);
  cb_region.bind_value("setting", ra.setting);
  cb_region.bind_value("bound", ra.bound);
  cb_region.bind_value("tol", ra.tol);
  cb_region.bind_value("grid", ra.grid);

  SweepArgs sa;
  ConfigBinder cb_sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Trace boundary curves and compare enrollments");
  auto* opt_p = sweep_cmd->add_option("--p_A", sa.p_a, "Measurement BSC crossover");
  sweep_cmd->add_option("--snr_db", sa.snr_db, "Measurement SNR in dB")->excludes(opt_p);
  sweep_cmd->add_option("--mode", sa.mode, "single|two|compare")
      ->check(CLI::IsMember({"single", "two", "compare"}))
      ->capture_default_str();
  sweep_cmd->add_option("--grid", sa.grid, "Number of test-channel crossovers")->capture_default_str();
  sweep_cmd->add_option("--out", sa.out, "Output directory")->capture_default_str();
  sweep_cmd->add_flag("--asymmetric", sa.asymmetric, "Two mode: optimize (q1, q2) pairs");
  sweep_cmd->add_option("--config", config, "JSON file overriding the flags");
  cb_sweep.bind_optional("p_A", sa.p_a);
  cb_sweep.bind_optional("snr_db", sa.snr_db);
  cb_sweep.bind_value("mode", sa.mode);
  cb_sweep.bind_value("grid", sa.grid);
  cb_sweep.bind_value("out", sa.out);
  cb_sweep.bind_value("asymmetric", sa.asymmetric);

  FmeArgs fa;
  ConfigBinder cb_fme;
  auto* fme_cmd = app.add_subcommand("fme", "Certify the projection, redundancy and corner claims");
  fme_cmd->add_option("channel", fa.channel, "Two-entity channel JSON file")->required();
  fme_cmd->add_option("aux", fa.aux, "Aux JSON file")->required();
  fme_cmd->add_option("--reduced", fa.reduced, "Reduced system JSON to check instead of the built-in one");
  fme_cmd->add_option("--dump-reduced", fa.dump_reduced, "Write the built-in reduced system as JSON");
  fme_cmd->add_option("--tol", fa.tol, "Tolerance")->capture_default_str();
  fme_cmd->add_option("--config", config, "JSON file overriding the flags");
  cb_fme.bind_optional("reduced", fa.reduced);
  cb_fme.bind_optional("dump_reduced", fa.dump_reduced);
  cb_fme.bind_value("tol", fa.tol);

  SimArgs ma;
  ConfigBinder cb_sim;
  auto* sim_cmd = app.add_subcommand("sim", "Run the exhaustive random-binning oracle");
  sim_cmd->add_option("channel", ma.channel, "Channel JSON file")->required();
  sim_cmd->add_option("--n", ma.n, "Blocklength")->capture_default_str();
  sim_cmd->add_option("--rs", ma.rs, "Key rate")->capture_default_str();
  sim_cmd->add_option("--rw", ma.rw, "Storage rate")->capture_default_str();
  sim_cmd->add_option("--rc", ma.rc, "Public randomness rate")->capture_default_str();
  sim_cmd->add_option("--trials", ma.trials, "Independent bin draws")->capture_default_str();
  sim_cmd->add_option("--seed", ma.seed, "RNG seed")->capture_default_str();
  sim_cmd->add_flag("--injective", ma.injective, "Draw a random bijection instead of independent bins");
  sim_cmd->add_flag("--one-time-pad", ma.one_time_pad, "Also run the chosen-secret padding check");
  sim_cmd->add_option("--trend", ma.trend, "Blocklengths for a trend check")->delimiter(',');
  sim_cmd->add_option("--csv", ma.csv, "Trend CSV output path");
  sim_cmd->add_option("--config", config, "JSON file overriding the flags");
  cb_sim.bind_value("n", ma.n);
  cb_sim.bind_value("rs", ma.rs);
  cb_sim.bind_value("rw", ma.rw);
  cb_sim.bind_value("rc", ma.rc);
  cb_sim.bind_value("trials", ma.trials);
  cb_sim.bind_value("seed", ma.seed);
  cb_sim.bind_value("injective", ma.injective);
  cb_sim.bind_value("one_time_pad", ma.one_time_pad);
  cb_sim.bind_value("trend", ma.trend);
  cb_sim.bind_optional("csv", ma.csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto with_config = [&](const ConfigBinder& b, auto run) {
    return guarded([&] {
      if (config) b.apply(*config);
      return run();
    });
  };
  if (*classify_cmd) return with_config(cb_classify, [&] { return run_classify(ca); });
  if (*region_cmd) return with_config(cb_region, [&] { return run_region(ra); });
  if (*sweep_cmd) return with_config(cb_sweep, [&] { return run_sweep(sa); });
  if (*fme_cmd) return with_config(cb_fme, [&] { return run_fme(fa); });
  if (*sim_cmd) return with_config(cb_sim, [&] { return run_sim(ma); });
  return 2;
}
