#pragma once

// Run configuration, the staged pipeline behind the command line driver, and
// convergence studies. A run parses one INI-style config, executes the stages
// of the requested operation, and leaves a self-describing output directory:
// meshes (OFF + sidecar), spectra (CSV), check reports (JSON), a summary
// table, and a manifest carrying the config hash. A stage failure marks the
// manifest incomplete with the stage name. Writers come from mesh_io and are
// atomic and timestamp-free, so reruns of one config are byte-identical.

#include "fbms/mesh_io.hpp"
#include "fbms/verify.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <filesystem>

namespace fbms {

// Config parse/validation failures; the driver maps these to their own exit
// status so they are distinguishable from pipeline failures.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  SurfaceDesc surface;
  std::vector<int> levels = {0, 1, 2};
  std::vector<CheckId> checks;  // empty under `verify`: filled by default_checks
  std::string operation = "verify";  // generate | spectrum | hodge | verify | study
  std::string study_quantity;        // named scalar for `study`
  int jacobi_count = 8;
  int hodge_count = 13;
  int comparison_j = 5;  // spectral comparison runs j = 1..comparison_j
  double eigen_tol = 1e-9;
  std::string out_dir = "out";
  bool deterministic = false;
  std::uint64_t seed = 0x5eedULL;
  bool write_mesh = true;
  bool write_spectra = true;
  bool write_operators = false;
  std::string source_text;  // raw config bytes, hashed into the manifest
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

}  // namespace detail

inline std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  for (const std::string& tok : detail::split_list(s)) {
    if (tok.empty()) throw std::invalid_argument("empty entry in level list '" + s + "'");
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("bad level '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<CheckId> parse_checks(const std::string& s) {
  std::vector<CheckId> out;
  for (const std::string& tok : detail::split_list(s))
    if (!tok.empty()) out.push_back(check_id_from_string(tok));
  return out;
}

// Every check the surface supports, in report order.
inline std::vector<CheckId> default_checks(const SurfaceDesc& desc) {
  switch (desc.kind) {
    case SurfaceKind::Disk:
      return {CheckId::PPC_A, CheckId::PPC_B, CheckId::PC1, CheckId::LAPIP, CheckId::JC,
              CheckId::BC,    CheckId::IC,    CheckId::ER,  CheckId::IB};
    case SurfaceKind::Catenoid:
      return {CheckId::PPC_A, CheckId::PPC_B, CheckId::PC1, CheckId::LAPIP, CheckId::JC,
              CheckId::BC,    CheckId::IC,    CheckId::ROS, CheckId::ER,    CheckId::IB};
    default:
      return {CheckId::PC1, CheckId::IC, CheckId::ER, CheckId::IB};
  }
}

inline void validate_run_config(const RunConfig& cfg) {
  auto fail = [](const std::string& m) { throw ConfigError("config validation: " + m); };
  if (cfg.levels.empty()) fail("empty level ladder");
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    if (cfg.levels[i] < 0) fail("negative refinement level");
    if (i > 0 && cfg.levels[i] <= cfg.levels[i - 1]) fail("level ladder must increase strictly");
  }
  if (cfg.jacobi_count < 1 || cfg.hodge_count < 1 || cfg.comparison_j < 1)
    fail("eigen counts must be >= 1");
  if (cfg.surface.resolution < 2) fail("surface resolution must be >= 2");
  if (cfg.surface.kind == SurfaceKind::Synthetic) {
    if (cfg.surface.boundaries < 1) fail("synthetic surface needs k >= 1 boundary components");
    if (cfg.surface.genus < 0) fail("synthetic surface needs genus >= 0");
  }
  static const char* ops[] = {"generate", "spectrum", "hodge", "verify", "study"};
  if (std::find_if(std::begin(ops), std::end(ops),
                   [&](const char* o) { return cfg.operation == o; }) == std::end(ops))
    fail("unknown operation '" + cfg.operation + "'");
  if (cfg.operation == "study") {
    if (cfg.levels.size() < 3) fail("a study needs a ladder of at least 3 levels");
    if (cfg.study_quantity.empty()) fail("a study needs a quantity");
  }
}

// INI-style parser: [section] headers, key = value lines, '#' or ';' comments.
// Errors carry "<name>:<line>: ...".
inline RunConfig parse_run_config(const std::string& text, const std::string& name = "config") {
  RunConfig cfg;
  cfg.source_text = text;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  auto fail = [&](const std::string& m) {
    throw ConfigError(name + ":" + std::to_string(lineno) + ": " + m);
  };
  while (std::getline(is, line)) {
    ++lineno;
    auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    try {
      if (section == "surface") {
        if (key == "kind") cfg.surface.kind = surface_kind_from_string(value);
        else if (key == "resolution") cfg.surface.resolution = std::stoi(value);
        else if (key == "genus") cfg.surface.genus = std::stoi(value);
        else if (key == "boundaries") cfg.surface.boundaries = std::stoi(value);
        else fail("unknown key '" + key + "' in [surface]");
      } else if (section == "run") {
        if (key == "operation") cfg.operation = value;
        else if (key == "levels") cfg.levels = parse_levels(value);
        else if (key == "checks") cfg.checks = parse_checks(value);
        else if (key == "jacobi_count") cfg.jacobi_count = std::stoi(value);
        else if (key == "hodge_count") cfg.hodge_count = std::stoi(value);
        else if (key == "comparison_j") cfg.comparison_j = std::stoi(value);
        else if (key == "eigen_tol") cfg.eigen_tol = std::stod(value);
        else if (key == "deterministic") cfg.deterministic = detail::parse_bool(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else fail("unknown key '" + key + "' in [run]");
      } else if (section == "output") {
        if (key == "directory") cfg.out_dir = value;
        else if (key == "mesh") cfg.write_mesh = detail::parse_bool(value);
        else if (key == "spectra") cfg.write_spectra = detail::parse_bool(value);
        else if (key == "operators") cfg.write_operators = detail::parse_bool(value);
        else fail("unknown key '" + key + "' in [output]");
      } else if (section == "study") {
        if (key == "quantity") cfg.study_quantity = value;
        else fail("unknown key '" + key + "' in [study]");
      } else {
        fail(section.empty() ? "key before any [section]" : "unknown section [" + section + "]");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {  // stoi/stod/enum parses
      fail(std::string(e.what()) + " for key '" + key + "'");
    }
  }
  validate_run_config(cfg);
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream body;
  body << is.rdbuf();
  return parse_run_config(body.str(), path.filename().string());
}

// ---------------------------------------------------------------------------
// Convergence studies: a named scalar per level against a closed-form
// reference. Rates are log2 of successive error ratios; a non-monotone step
// reports "n/a" and the study still succeeds.
// ---------------------------------------------------------------------------

struct StudyRow {
  int level = 0;
  double value = 0;
  double error = 0;
  std::string ratio = "n/a";
  std::string rate = "n/a";
};

struct StudyResult {
  std::string quantity;
  double reference = 0;
  std::vector<StudyRow> rows;
};

inline StudyResult convergence_study(const RunConfig& cfg) {
  if (cfg.levels.size() < 3)
    throw std::invalid_argument("convergence_study: need a ladder of at least 3 levels");
  StudyResult out;
  out.quantity = cfg.study_quantity;

  auto need_kind = [&](SurfaceKind k) {
    if (cfg.surface.kind != k)
      throw std::invalid_argument("study quantity '" + cfg.study_quantity +
                                  "' does not apply to " + cfg.surface.name());
  };
  std::function<double(const SurfaceBundle&)> measure;
  if (cfg.study_quantity == "disk_lambda1") {
    // first nonzero Neumann eigenvalue of the scalar Laplacian
    need_kind(SurfaceKind::Disk);
    double k = disk_neumann_root();
    out.reference = k * k;
    measure = [&cfg](const SurfaceBundle& b) {
      ScalarOperators ops = assemble_scalar_operators(b.mesh, b.edges);
      EigenOptions opts;
      opts.tol = cfg.eigen_tol;
      opts.seed = cfg.seed;
      opts.want_vectors = false;
      SpectralResult r = smallest_eigenpairs(ops.stiffness, ops.mass, 2, opts);
      return r.values[1];
    };
  } else if (cfg.study_quantity == "disk_area") {
    need_kind(SurfaceKind::Disk);
    out.reference = std::numbers::pi;
    measure = [](const SurfaceBundle& b) { return total_area(b.mesh); };
  } else if (cfg.study_quantity == "catenoid_max_a2") {
    // discrete curvature estimate against the waist value 2/c^2
    need_kind(SurfaceKind::Catenoid);
    double c = catenoid_scale();
    out.reference = 2.0 / (c * c);
    measure = [](const SurfaceBundle& b) {
      return shape_field_estimated(b.mesh, b.edges).a2.maxCoeff();
    };
  } else {
    throw std::invalid_argument("unknown study quantity '" + cfg.study_quantity + "'");
  }

  for (int level : cfg.levels) {
    SurfaceBundle b = make_surface(cfg.surface, level);
    StudyRow row;
    row.level = level;
    row.value = measure(b);
    row.error = std::abs(row.value - out.reference) / std::max(std::abs(out.reference), 1e-300);
    if (!out.rows.empty()) {
      double prev = out.rows.back().error;
      if (prev > 0 && row.error > 0 && row.error < prev) {
        row.ratio = detail::format_double(prev / row.error);
        row.rate = detail::format_double(std::log2(prev / row.error));
      }
    }
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// The staged pipeline.
// ---------------------------------------------------------------------------

struct RunResult {
  int exit_code = 0;  // 0 all checks pass, 1 a check failed, 2 a stage failed
  std::vector<CheckReport> reports;
  std::vector<std::string> artifacts;  // file names relative to out_dir
  std::string failed_stage;            // empty when the run completed
  std::string error;
  std::string summary;  // the text also written to summary.txt
};

namespace detail {

inline std::string spectrum_csv(const SpectralResult& r) {
  std::ostringstream os;
  os << "index,eigenvalue,residual\n";
  for (int i = 0; i < r.values.size(); ++i)
    os << i + 1 << ',' << format_double(r.values[i]) << ','
       << format_double(i < r.residuals.size() ? r.residuals[i] : 0.0) << '\n';
  return os.str();
}

inline std::string reports_json(const std::vector<CheckReport>& reports) {
  std::string s = "{\"reports\":[";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    s += i ? ",\n" : "\n";
    s += to_json(reports[i]);
  }
  s += "\n]}\n";
  return s;
}

inline std::string report_line(const CheckReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %-16s L%d  max %-12.5g l2 %-12.5g tol %-8.3g %s",
                r.check_id.c_str(), r.surface.c_str(), r.level, r.residual_max, r.residual_l2,
                r.tolerance, r.pass ? "pass" : "FAIL");
  return buf;
}

}  // namespace detail

inline RunResult run_config(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  validate_run_config(cfg);
  if (cfg.deterministic) Eigen::setNbThreads(1);

  RunResult result;
  std::ostringstream summary;
  summary << "operation " << cfg.operation << " on " << cfg.surface.name() << ", levels";
  for (int l : cfg.levels) summary << ' ' << l;
  summary << '\n';

  fs::create_directories(cfg.out_dir);
  auto emit = [&](const std::string& name, const std::string& content) {
    detail::atomic_write(fs::path(cfg.out_dir) / name, content);
    result.artifacts.push_back(name);
  };

  EigenOptions opts;
  opts.tol = cfg.eigen_tol;
  opts.seed = cfg.seed;

  std::string stage = "surface";
  try {
    std::vector<SurfaceBundle> bundles;
    for (int l : cfg.levels) bundles.push_back(make_surface(cfg.surface, l));

    if (cfg.operation == "generate" || cfg.write_mesh) {
      stage = "generate";
      for (const SurfaceBundle& b : bundles) {
        std::string base = b.desc.name() + "_L" + std::to_string(b.level);
        write_off(fs::path(cfg.out_dir) / (base + ".off"), b.mesh);
        result.artifacts.push_back(base + ".off");
        std::map<std::string, std::string> meta{
            {"kind", to_string(b.desc.kind)},
            {"resolution", std::to_string(b.desc.resolution)},
            {"level", std::to_string(b.level)},
            {"genus", std::to_string(b.topology.genus)},
            {"boundaries", std::to_string(b.topology.boundary_components)},
            {"vertices", std::to_string(b.mesh.vertex_count())},
            {"triangles", std::to_string(b.mesh.triangle_count())},
            {"area", detail::format_double(total_area(b.mesh))},
        };
        if (b.desc.kind == SurfaceKind::Catenoid) {
          meta["c"] = detail::format_double(catenoid_scale());
          meta["t0"] = detail::format_double(catenoid_t0());
        }
        write_sidecar(fs::path(cfg.out_dir) / (base + ".meta"), meta);
        result.artifacts.push_back(base + ".meta");
        summary << base << ": " << b.mesh.vertex_count() << " vertices, "
                << b.mesh.triangle_count() << " triangles\n";
      }
    }

    if (cfg.operation == "spectrum") {
      stage = "spectrum";
      for (const SurfaceBundle& b : bundles) {
        JacobiProblem p = assemble_jacobi(b, shape_field(b));
        SpectralResult r = eigen_jacobi(p, cfg.jacobi_count, opts);
        std::string base = "jacobi_L" + std::to_string(b.level);
        if (cfg.write_spectra) {
          emit(base + ".csv", detail::spectrum_csv(r));
          // eigenvectors as vertex-aligned scalar fields, matching the OFF order
          std::ostringstream modes;
          modes << "vertex";
          for (int j = 0; j < r.vectors.cols(); ++j) modes << ",mode_" << j + 1;
          modes << '\n';
          for (int v = 0; v < r.vectors.rows(); ++v) {
            modes << v;
            for (int j = 0; j < r.vectors.cols(); ++j)
              modes << ',' << detail::format_double(r.vectors(v, j));
            modes << '\n';
          }
          emit(base + "_modes.csv", modes.str());
        }
        if (cfg.write_operators) {
          write_matrix_market(fs::path(cfg.out_dir) / (base + "_A.mtx"), p.A);
          result.artifacts.push_back(base + "_A.mtx");
        }
        MorseIndex mi = morse_index(p, opts);
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(p.A.rows());
        char line[160];
        std::snprintf(line, sizeof line,
                      "jacobi L%d: lambda_1 = %.6g, index = %d, nullity = %d, Q(1) = %.6g\n",
                      b.level, r.values.size() ? r.values[0] : 0.0, mi.index, mi.nullity,
                      p.quadratic_form(ones));
        summary << line;
      }
    }

    if (cfg.operation == "hodge") {
      stage = "hodge";
      for (const SurfaceBundle& b : bundles) {
        for (OneFormBC bc : {OneFormBC::Absolute, OneFormBC::Relative}) {
          HodgeProblem hp = assemble_one_form_laplacian(b, bc);
          SpectralResult r = eigen_one_form(hp, cfg.hodge_count, opts);
          std::string base = "hodge_" + to_string(bc) + "_L" + std::to_string(b.level);
          if (cfg.write_spectra) emit(base + ".csv", detail::spectrum_csv(r));
          if (cfg.write_operators) {
            write_matrix_market(fs::path(cfg.out_dir) / (base + "_A.mtx"), hp.A);
            result.artifacts.push_back(base + "_A.mtx");
          }
          BettiResult betti = betti_one(hp, opts);
          char line[160];
          std::snprintf(line, sizeof line,
                        "hodge %s L%d: betti_1 = %d, first nonzero = %.6g\n",
                        to_string(bc).c_str(), b.level,
                        betti.dim, betti.dim < r.values.size() ? r.values[betti.dim] : 0.0);
          summary << line;
        }
      }
    }

    if (cfg.operation == "verify") {
      stage = "verify";
      std::vector<CheckId> checks = cfg.checks.empty() ? default_checks(cfg.surface) : cfg.checks;
      for (CheckId id : checks) {
        switch (id) {
          case CheckId::IC:
            result.reports.push_back(check_ic(product_gauss_sphere()));
            break;
          case CheckId::ER:
            for (const SurfaceBundle& b : bundles) {
              ComparisonTable t = eigenvalue_comparison_table(b, cfg.comparison_j);
              char line[160];
              std::snprintf(line, sizeof line,
                            "ER L%d: lambda_1(J) = %.6g, lambda_1(Delta_1) = %.6g\n", b.level,
                            t.jacobi[0], t.hodge[0]);
              summary << line;
              result.reports.push_back(std::move(t.report));
            }
            break;
          case CheckId::IB: {
            int top = cfg.levels.back();
            if (top < 1)
              throw std::runtime_error("IB needs the ladder to reach level >= 1");
            result.reports.push_back(
                cfg.levels.size() >= 2 && cfg.levels[cfg.levels.size() - 2] == top - 1
                    ? check_index_bounds(bundles[bundles.size() - 2], bundles.back())
                    : check_index_bounds(cfg.surface, top));
            break;
          }
          default: {
            std::vector<CheckReport> ladder;
            for (const SurfaceBundle& b : bundles) ladder.push_back(run_identity_check(id, b));
            for (std::size_t i = 1; i < ladder.size(); ++i)
              ladder[i].rate = convergence_rate(ladder[i - 1].residual_max,
                                                ladder[i].residual_max);
            for (auto& r : ladder) result.reports.push_back(std::move(r));
            break;
          }
        }
      }
    }

    if (cfg.operation == "study") {
      stage = "study";
      StudyResult st = convergence_study(cfg);
      std::vector<std::vector<std::string>> rows;
      for (const StudyRow& row : st.rows)
        rows.push_back({std::to_string(row.level), detail::format_double(row.value),
                        detail::format_double(row.error), row.ratio, row.rate});
      write_csv(fs::path(cfg.out_dir) / ("study_" + st.quantity + ".csv"),
                {"level", "value", "error", "ratio", "rate"}, rows);
      result.artifacts.push_back("study_" + st.quantity + ".csv");
      summary << "study " << st.quantity << ", reference "
              << detail::format_double(st.reference) << '\n';
      for (const StudyRow& row : st.rows)
        summary << "  L" << row.level << ": value " << detail::format_double(row.value)
                << ", error " << detail::format_double(row.error) << ", rate " << row.rate
                << '\n';
    }
  } catch (const std::exception& e) {
    result.failed_stage = stage;
    result.error = e.what();
    summary << "FAILED at stage " << stage << ": " << e.what() << '\n';
  }

  if (cfg.operation == "verify") {
    // written even after a mid-stage failure: partial reports, flagged by the
    // manifest's complete = false
    for (const CheckReport& r : result.reports) summary << detail::report_line(r) << '\n';
    int failed = 0;
    for (const CheckReport& r : result.reports) failed += !r.pass;
    if (result.failed_stage.empty())
      summary << (failed == 0 ? "all checks pass\n"
                              : std::to_string(failed) + " check(s) failed\n");
    if (failed > 0) result.exit_code = 1;
    emit("reports.json", detail::reports_json(result.reports));
  }
  if (!result.failed_stage.empty()) result.exit_code = 2;

  if (!cfg.source_text.empty()) emit("config_used.ini", cfg.source_text);
  emit("summary.txt", summary.str());

  // manifest last: it lists every artifact including the summary
  std::vector<std::string> sorted = result.artifacts;
  std::sort(sorted.begin(), sorted.end());
  std::string manifest = "{\"artifacts\":[";
  for (std::size_t i = 0; i < sorted.size(); ++i)
    manifest += (i ? ",\"" : "\"") + sorted[i] + "\"";
  manifest += "],\"complete\":";
  manifest += result.failed_stage.empty() ? "true" : "false";
  manifest += ",\"config_hash\":\"" + hash_hex(fnv1a64(cfg.source_text)) + "\"";
  manifest += ",\"exit_code\":" + std::to_string(result.exit_code);
  manifest += ",\"failed_stage\":";
  manifest += result.failed_stage.empty() ? "null" : "\"" + result.failed_stage + "\"";
  manifest += ",\"operation\":\"" + cfg.operation + "\"";
  manifest += ",\"surface\":\"" + cfg.surface.name() + "\"}\n";
  detail::atomic_write(fs::path(cfg.out_dir) / "manifest.json", manifest);
  result.artifacts.push_back("manifest.json");

  result.summary = summary.str();
  return result;
}

}  // namespace fbms
