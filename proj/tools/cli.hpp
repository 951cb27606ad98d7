#pragma once

// Command-line front end. Exit status: 0 success, 1 domain error
// ("error: ..." on stderr), 2 usage error ("usage: ...").

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "ervs/ervs.hpp"

namespace ervs::cli {

namespace detail {

inline std::string vec3_check(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 3) return "expected x,y,z";
  try {
    for (const auto& p : parts) parse_double(p, "component");
  } catch (const Error&) {
    return "expected x,y,z";
  }
  return {};
}

inline Vec3 vec3_arg(const std::string& s) {
  Vec3 v;
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const auto comma = s.find(',', start);
    v[i] = parse_double(s.substr(start, comma - start), "component");
    start = comma + 1;
  }
  return v;
}

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

inline Json load_json(const std::string& path) { return parse_json(read_text_file(path), path); }

/// Hash of the input file contents, recorded in report configs.
inline std::string file_hash(const std::string& path) {
  return config_hash(Json(read_text_file(path)));
}

}  // namespace detail

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Error-resistant view selection toolkit", "ervs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::function<void()> action;

  // curve ------------------------------------------------------------------
  std::string c_p = "0.5,0,5", c_o1 = "0,0,0", c_dir = "1,0,0", c_axis = "look-at", c_out;
  double c_focal = 1000, c_tmin = 0.05, c_tmax = 5;
  std::size_t c_samples = 200;
  auto* curve = app.add_subcommand("curve", "Resistance against baseline length, as CSV");
  curve->add_option("--p", c_p, "Scene point x,y,z")->check(detail::vec3_check)->capture_default_str();
  curve->add_option("--o1", c_o1, "First camera center x,y,z")
      ->check(detail::vec3_check)
      ->capture_default_str();
  curve->add_option("--baseline-dir", c_dir, "Baseline direction x,y,z")
      ->check(detail::vec3_check)
      ->capture_default_str();
  curve->add_option("--axis", c_axis, "Second camera axis: look-at or x,y,z")
      ->check([](const std::string& s) { return s == "look-at" ? std::string{} : detail::vec3_check(s); })
      ->capture_default_str();
  curve->add_option("--focal", c_focal, "Focal length in pixels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  curve->add_option("--t-min", c_tmin)->capture_default_str();
  curve->add_option("--t-max", c_tmax)->capture_default_str();
  curve->add_option("--samples", c_samples)->check(CLI::PositiveNumber)->capture_default_str();
  curve->add_option("--out", c_out, "Output CSV (default stdout)");
  curve->callback([&] {
    action = [&] {
      AxisRule rule = LookAtPoint{};
      if (c_axis != "look-at") rule = FixedAxis{UnitVec3::normalized(detail::vec3_arg(c_axis))};
      const auto samples = baseline_error_curve(
          detail::vec3_arg(c_p), detail::vec3_arg(c_o1), UnitVec3::normalized(detail::vec3_arg(c_dir)),
          rule, c_focal, linspace(c_tmin, c_tmax, c_samples));
      detail::emit(c_out, write_curve_csv(samples), out);
    };
  });

  // simulate ---------------------------------------------------------------
  std::string s_config, s_out, s_tum, s_layout;
  std::uint64_t s_seed = 0;
  std::size_t s_views = 0, s_points = 0;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scene as JSON");
  simulate->add_option("--config", s_config, "SceneConfig JSON (defaults when omitted)")
      ->check(CLI::ExistingFile);
  auto* seed_opt = simulate->add_option("--seed", s_seed, "Override the config seed");
  auto* views_opt = simulate->add_option("--n-views", s_views, "Override n_views");
  auto* points_opt = simulate->add_option("--n-points", s_points, "Override n_points");
  simulate->add_option("--layout", s_layout, "Override layout")
      ->check(CLI::IsMember({"ring", "arc", "line"}));
  simulate->add_option("--out", s_out, "Output scene JSON (default stdout)");
  simulate->add_option("--tum", s_tum, "Also write camera centers as a TUM trajectory");
  simulate->callback([&] {
    action = [&] {
      SceneConfig cfg = s_config.empty() ? SceneConfig{} : scene_config_from_json(detail::load_json(s_config));
      if (*seed_opt) cfg.seed = s_seed;
      if (*views_opt) cfg.n_views = s_views;
      if (*points_opt) cfg.n_points = s_points;
      if (!s_layout.empty()) cfg.layout = layout_from_string(s_layout);
      const Scene scene = generate_scene(cfg);
      const Json cfg_json = to_json(cfg);
      Json j = to_json(scene);
      j["config"] = cfg_json;
      j["meta"] = meta_json(cfg.seed, cfg_json);
      detail::emit(s_out, j.dump(2) + "\n", out);
      if (!s_tum.empty()) {
        std::vector<TumPose> poses;
        for (const auto& c : scene.cameras) {
          TumPose p;
          p.timestamp = static_cast<double>(c.view.id);
          p.position = c.view.center;
          p.orientation = Eigen::Quaterniond(Eigen::Matrix3d(c.rotation.transpose()));
          poses.push_back(p);
        }
        write_text_file(s_tum, write_tum_trajectory(poses));
      }
    };
  });

  // matrix -----------------------------------------------------------------
  std::string m_scene, m_out, m_agg = "mean";
  unsigned m_threads = 1;
  auto* matrix = app.add_subcommand("matrix", "Resistance matrix of a scene, as CSV");
  matrix->add_option("--scene", m_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  matrix->add_option("--aggregator", m_agg)
      ->check(CLI::IsMember({"mean", "median"}))
      ->capture_default_str();
  matrix->add_option("--threads", m_threads)->check(CLI::PositiveNumber)->capture_default_str();
  matrix->add_option("--out", m_out, "Output CSV (default stdout)");
  matrix->callback([&] {
    action = [&] {
      const Scene scene = scene_from_json(detail::load_json(m_scene));
      const auto cams = scene.view_cameras();
      const auto e = build_matrix(cams, scene.points, scene.visibility,
                                  m_agg == "median" ? Aggregator::median : Aggregator::mean, m_threads);
      detail::emit(m_out, write_matrix_csv(e), out);
    };
  });

  // select -----------------------------------------------------------------
  std::string sel_matrix, sel_out;
  std::size_t sel_k = kDefaultCandidateCount;
  auto* select = app.add_subcommand("select", "Candidate views from a matrix CSV, as JSON");
  select->add_option("--matrix", sel_matrix, "Matrix CSV")->required()->check(CLI::ExistingFile);
  select->add_option("--k", sel_k, "Candidates per view")->check(CLI::PositiveNumber)->capture_default_str();
  select->add_option("--out", sel_out, "Output JSON (default stdout)");
  select->callback([&] {
    action = [&] {
      const auto e = read_matrix_csv(read_text_file(sel_matrix));
      Json j = to_json(select_views(e, sel_k));
      const Json cfg = {{"command", "select"}, {"k", sel_k}, {"matrix", detail::file_hash(sel_matrix)}};
      j["meta"] = meta_json(0, cfg);
      detail::emit(sel_out, j.dump(2) + "\n", out);
    };
  });

  // compare ----------------------------------------------------------------
  std::string cmp_scene, cmp_out, cmp_csv, cmp_mode = "isotropic_gaussian";
  double cmp_noise = 1.0;
  std::uint64_t cmp_seed = 1;
  std::size_t cmp_k = kDefaultCandidateCount;
  std::vector<std::string> cmp_strategies{"resistant", "nearest_baseline", "exhaustive"};
  auto* compare = app.add_subcommand("compare", "Compare pairing strategies on one noisy draw");
  compare->add_option("--scene", cmp_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--noise", cmp_noise, "Noise in pixels")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  compare->add_option("--noise-mode", cmp_mode)
      ->check(CLI::IsMember({"isotropic_gaussian", "epipolar_1px"}))
      ->capture_default_str();
  compare->add_option("--seed", cmp_seed)->capture_default_str();
  compare->add_option("--k", cmp_k)->check(CLI::PositiveNumber)->capture_default_str();
  compare->add_option("--strategies", cmp_strategies)
      ->delimiter(',')
      ->check(CLI::IsMember({"resistant", "nearest_baseline", "exhaustive"}));
  compare->add_option("--out", cmp_out, "Output JSON (default stdout)");
  compare->add_option("--csv", cmp_csv, "Also write a CSV summary");
  compare->callback([&] {
    action = [&] {
      const Scene scene = scene_from_json(detail::load_json(cmp_scene));
      std::vector<Strategy> strategies;
      for (const auto& s : cmp_strategies) strategies.push_back(strategy_from_string(s));
      const auto report = compare_strategies(scene, cmp_noise, cmp_seed, cmp_k, strategies,
                                             noise_mode_from_string(cmp_mode));
      Json j = to_json(report);
      const Json cfg = {{"command", "compare"}, {"noise_px", cmp_noise}, {"noise_mode", cmp_mode},
                        {"k", cmp_k},           {"strategies", cmp_strategies},
                        {"scene", detail::file_hash(cmp_scene)}};
      j["meta"] = meta_json(cmp_seed, cfg);
      detail::emit(cmp_out, j.dump(2) + "\n", out);
      if (!cmp_csv.empty()) write_text_file(cmp_csv, strategy_report_csv(report));
    };
  });

  // sweep-k ----------------------------------------------------------------
  std::string sw_scene, sw_out, sw_csv;
  double sw_noise = 1.0;
  std::uint64_t sw_seed = 1;
  std::size_t sw_kmin = 1, sw_kmax = 10;
  auto* sweep = app.add_subcommand("sweep-k", "Select and triangulate for a range of k");
  sweep->add_option("--scene", sw_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--noise", sw_noise)->check(CLI::NonNegativeNumber)->capture_default_str();
  sweep->add_option("--seed", sw_seed)->capture_default_str();
  sweep->add_option("--k-min", sw_kmin)->capture_default_str();
  sweep->add_option("--k-max", sw_kmax)->capture_default_str();
  sweep->add_option("--out", sw_out, "Output JSON (default stdout)");
  sweep->add_option("--csv", sw_csv, "Also write a CSV table");
  sweep->callback([&] {
    action = [&] {
      if (sw_kmin > sw_kmax) throw Error(Errc::invalid_argument, "empty k range");
      const Scene scene = scene_from_json(detail::load_json(sw_scene));
      std::vector<std::size_t> ks;
      for (std::size_t k = sw_kmin; k <= sw_kmax; ++k) ks.push_back(k);
      const auto rows = sweep_candidate_count(scene, sw_noise, sw_seed, ks);
      const Json cfg = {{"command", "sweep-k"}, {"noise_px", sw_noise}, {"k_min", sw_kmin},
                        {"k_max", sw_kmax},     {"scene", detail::file_hash(sw_scene)}};
      const Json j = {{"rows", to_json(rows)}, {"meta", meta_json(sw_seed, cfg)}};
      detail::emit(sw_out, j.dump(2) + "\n", out);
      if (!sw_csv.empty()) write_text_file(sw_csv, sweep_csv(rows));
    };
  });

  // perturb ----------------------------------------------------------------
  std::string pt_scene, pt_out, pt_mode = "isotropic_gaussian";
  double pt_noise = 1.0;
  std::uint64_t pt_seed = 1;
  auto* perturb = app.add_subcommand("perturb", "Noisy copy of a scene's observations, as JSON");
  perturb->add_option("--scene", pt_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  perturb->add_option("--noise", pt_noise)->check(CLI::NonNegativeNumber)->capture_default_str();
  perturb->add_option("--mode", pt_mode)
      ->check(CLI::IsMember({"isotropic_gaussian", "epipolar_1px"}))
      ->capture_default_str();
  perturb->add_option("--seed", pt_seed)->capture_default_str();
  perturb->add_option("--out", pt_out, "Output JSON (default stdout)");
  perturb->callback([&] {
    action = [&] {
      const Scene scene = scene_from_json(detail::load_json(pt_scene));
      const NoiseMode mode = noise_mode_from_string(pt_mode);
      const auto partners = mode == NoiseMode::epipolar_1px ? next_view_partners(scene.cameras.size())
                                                            : std::vector<std::size_t>{};
      const auto noisy = perturb_observations(scene, pt_noise, mode, pt_seed, partners);
      const Json cfg = {{"command", "perturb"}, {"noise_px", pt_noise}, {"mode", pt_mode},
                        {"scene", detail::file_hash(pt_scene)}};
      const Json j = {{"observations", to_json(noisy)}, {"meta", meta_json(pt_seed, cfg)}};
      detail::emit(pt_out, j.dump(2) + "\n", out);
    };
  });

  // ate --------------------------------------------------------------------
  std::string a_est, a_gt;
  double a_gap = 0.02;
  bool a_index = false;
  auto* ate = app.add_subcommand("ate", "Absolute trajectory error of two TUM files");
  ate->add_option("--est", a_est, "Estimated trajectory")->required()->check(CLI::ExistingFile);
  ate->add_option("--gt", a_gt, "Ground-truth trajectory")->required()->check(CLI::ExistingFile);
  ate->add_option("--max-gap", a_gap, "Timestamp association tolerance in seconds")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ate->add_flag("--by-index", a_index, "Pair poses by index instead of timestamp");
  ate->callback([&] {
    action = [&] {
      const auto est = parse_tum_trajectory(read_text_file(a_est));
      const auto gt = parse_tum_trajectory(read_text_file(a_gt));
      const auto [a, b] = a_index ? associate_by_index(est, gt) : associate_by_timestamp(est, gt, a_gap);
      out << format_double(absolute_trajectory_error(a, b)) << "\n";
    };
  });

  // reproj -----------------------------------------------------------------
  std::string r_scene, r_obs;
  bool r_rms = false;
  auto* reproj = app.add_subcommand("reproj", "Average reprojection error of scene points");
  reproj->add_option("--scene", r_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  reproj->add_option("--observations", r_obs, "Observations JSON (default: the scene's own)")
      ->check(CLI::ExistingFile);
  reproj->add_flag("--rms", r_rms, "Report the root of the mean squared error");
  reproj->callback([&] {
    action = [&] {
      const Scene scene = scene_from_json(detail::load_json(r_scene));
      std::vector<Observation> obs = scene.observations;
      if (!r_obs.empty()) {
        const Json j = detail::load_json(r_obs);
        obs = observations_from_json(j.is_object() ? j.at("observations") : j);
      }
      const auto cams = scene.projective_cameras();
      out << format_double(avg_reprojection_error(
                 cams, scene.points, obs,
                 r_rms ? ReprojectionMetric::rms : ReprojectionMetric::mean_squared))
          << "\n";
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << "\n";
    return 2;
  }

  try {
    action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ervs::cli
