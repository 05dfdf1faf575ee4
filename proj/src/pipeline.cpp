#include "qaction/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>

#include "qaction/export_data.hpp"
#include "qaction/invariance.hpp"
#include "qaction/trajectory.hpp"

namespace qaction {

namespace {

std::string time_tag(double T) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", T);
  return buf;
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

// Window indices used for trajectory spot checks: every stride-th node so the
// pair count stays O(50) regardless of window resolution. Diagonal pairs are
// kept; a = b dip paths are legitimate stationary paths.
std::vector<int> decimate(int w) {
  int stride = std::max(1, (w - 1) / 8);
  std::vector<int> idx;
  for (int i = 0; i < w; i += stride) idx.push_back(i);
  if (idx.back() != w - 1) idx.push_back(w - 1);
  return idx;
}

struct FitAtT {
  PropagatorTable table;
  EtaField eta;
  QuantumAction act;
  FitReport rep;
};

FitAtT fit_at(const RunConfig& cfg, std::shared_ptr<const SpectralDecomposition> spec,
              double T) {
  FitAtT out;
  out.table = build_propagator_table(spec, cfg.window, T, cfg.exec());
  if (out.table.truncation_warning)
    std::cerr << "warning: T=" << T << " spectral tail " << out.table.truncation_tail
              << " still above threshold with " << out.table.n_states_used
              << " states; increase n_states\n";
  out.eta = build_eta_field(out.table, cfg.G0, cfg.exec());
  auto fitted = fit_finite_T(out.eta, cfg.m_tilde_gauge, cfg.basis_degrees, cfg.exec(),
                             cfg.seed);
  out.act = fitted.first;
  out.rep = fitted.second;
  return out;
}

struct PairCheck {
  std::vector<SigmaSample> samples;
  std::vector<Trajectory> paths;
  std::vector<std::pair<double, double>> momentum_residuals;
};

PairCheck run_pairs(const RunConfig& cfg, const QuantumAction& act, const EtaField& eta,
                    bool with_momenta) {
  PairCheck out;
  std::vector<int> idx = decimate(eta.size());
  for (std::size_t u = 0; u < idx.size(); ++u) {
    for (std::size_t v = u; v < idx.size(); ++v) {
      int i = idx[u], j = idx[v];
      Trajectory tr =
          solve_trajectory(act, eta.positions[i], eta.positions[j], eta.T, cfg.n_t);
      out.samples.push_back({i, j, tr.sigma});
      if (with_momenta) out.momentum_residuals.push_back(check_momentum_condition(act, tr, eta));
      out.paths.push_back(std::move(tr));
    }
  }
  return out;
}

void run_impl(const RunConfig& cfg) {
  cfg.validate();
  nlohmann::json meta = config_to_json(cfg);
  std::cout << "config " << meta.dump() << "\n";

  Grid grid = cfg.make_grid();
  std::cout << "grid [" << format_g17(grid.x_min) << ", " << format_g17(grid.x_max)
            << "] n_points=" << grid.n_points << " dx=" << format_g17(grid.dx()) << "\n";
  meta["resolved_grid"] = {{"x_min", grid.x_min}, {"x_max", grid.x_max},
                           {"n_points", grid.n_points}};

  auto spec = std::make_shared<const SpectralDecomposition>(
      solve_spectrum(cfg.system, grid, cfg.n_states, cfg.exec()));
  std::cout << "spectrum n_states=" << spec->n_states
            << " E0=" << format_g17(spec->energies[0].hi)
            << " ortho_defect=" << format_g17(spec->ortho_defect)
            << " refine_defect=" << format_g17(spec->refine_defect) << "\n";

  switch (cfg.mode) {
    case RunMode::fk: {
      QuantumAction act =
          reconstruct_fk(*spec, cfg.m_tilde_gauge, cfg.window, cfg.basis_degrees);
      nlohmann::json j{{"config", meta}, {"action", action_to_json(act)}};
      write_json_file(join_path(cfg.output_dir, "action_fk.json"), j);
      std::ostringstream os;
      os << "# ground-state limit of the potential fit over the window lattice\n";
      os << "# config " << meta.dump() << "\n";
      os << "x,v_tilde,gauge_product\n";
      for (int l = 0; l < cfg.window.n_nodes; ++l) {
        double x = cfg.window.lo +
                   (cfg.window.hi - cfg.window.lo) * l / (cfg.window.n_nodes - 1);
        double v = act.potential_tilde(x);
        os << format_g17(x) << ',' << format_g17(v) << ','
           << format_g17(act.m_tilde * (v - act.V0)) << "\n";
      }
      write_text_file(join_path(cfg.output_dir, "fk_pointwise.csv"), os.str());
      std::cout << "fk coefficients";
      for (int d : cfg.basis_degrees)
        std::cout << " c" << d << "=" << format_g17(act.potential_tilde.coeffs[d]);
      std::cout << "\n";
      break;
    }

    case RunMode::finite_t: {
      for (double T : cfg.times()) {
        FitAtT f = fit_at(cfg, spec, T);
        PairCheck pc = run_pairs(cfg, f.act, f.eta, false);
        ZEstimate z = estimate_Z(f.act, f.eta, pc.samples);
        f.act.Z_tilde = z.Z;
        std::string tag = time_tag(T);
        nlohmann::json jz{{"log_Z", z.log_Z},
                          {"Z", z.Z},
                          {"max_dev", z.max_dev},
                          {"n_samples", z.n_samples}};
        write_json_file(join_path(cfg.output_dir, "action_T" + tag + ".json"),
                        {{"config", meta}, {"action", action_to_json(f.act)}, {"Z", jz}});
        write_json_file(join_path(cfg.output_dir, "fit_T" + tag + ".json"),
                        {{"config", meta}, {"fit", fit_report_to_json(f.rep)}, {"Z", jz}});
        export_plotdata(f.table, join_path(cfg.output_dir, "propagator_T" + tag + ".csv"),
                        meta);
        export_plotdata(f.eta, join_path(cfg.output_dir, "eta_T" + tag + ".csv"), meta);
        std::cout << "T=" << tag << " residual_rms=" << format_g17(f.rep.residual_rms)
                  << " cond=" << format_g17(f.rep.condition_number)
                  << " Z=" << format_g17(z.Z) << " conjecture_dev=" << format_g17(z.max_dev)
                  << "\n";
      }
      break;
    }

    case RunMode::verify: {
      nlohmann::json results = nlohmann::json::array();
      for (double T : cfg.times()) {
        FitAtT f = fit_at(cfg, spec, T);
        PairCheck pc = run_pairs(cfg, f.act, f.eta, true);
        ZEstimate z = estimate_Z(f.act, f.eta, pc.samples);
        f.act.Z_tilde = z.Z;

        std::ostringstream os;
        os << "# amplitude vs action along classical trajectories, T=" << format_g17(T)
           << "\n";
        os << "# config " << meta.dump() << "\n";
        os << "a,b,sigma,p_in_res,p_fi_res,log_G_data,log_G_model,dev\n";
        double mom_max = 0.0, mom_rms = 0.0, drift_max = 0.0, jac_min = 1.0;
        for (std::size_t s = 0; s < pc.samples.size(); ++s) {
          const SigmaSample& sm = pc.samples[s];
          const Trajectory& tr = pc.paths[s];
          double log_g_data = f.eta.log_G(sm.j, sm.i);
          double log_g_model = z.log_Z - sm.sigma / f.act.hbar;
          double dev = std::fabs(log_g_model - log_g_data);
          auto [rin, rfi] = pc.momentum_residuals[s];
          mom_max = std::max({mom_max, rin, rfi});
          mom_rms += rin * rin + rfi * rfi;
          drift_max = std::max(drift_max, tr.energy_drift);
          jac_min = std::min(jac_min, tr.jacobi_min);
          os << format_g17(tr.a) << ',' << format_g17(tr.b) << ',' << format_g17(sm.sigma)
             << ',' << format_g17(rin) << ',' << format_g17(rfi) << ','
             << format_g17(log_g_data) << ',' << format_g17(log_g_model) << ','
             << format_g17(dev) << "\n";
        }
        mom_rms = std::sqrt(mom_rms / (2.0 * pc.samples.size()));
        std::string tag = time_tag(T);
        write_text_file(join_path(cfg.output_dir, "verify_T" + tag + ".csv"), os.str());
        results.push_back({{"T", T},
                           {"fit_residual_rms", f.rep.residual_rms},
                           {"fit_residual_max", f.rep.residual_max},
                           {"momentum_residual_rms", mom_rms},
                           {"momentum_residual_max", mom_max},
                           {"conjecture_dev", z.max_dev},
                           {"log_Z", z.log_Z},
                           {"n_pairs", static_cast<int>(pc.samples.size())},
                           {"energy_drift_max", drift_max},
                           {"jacobi_min", jac_min}});
        std::cout << "T=" << tag << " momentum_max=" << format_g17(mom_max)
                  << " conjecture_dev=" << format_g17(z.max_dev) << "\n";
      }
      write_json_file(join_path(cfg.output_dir, "verify_summary.json"),
                      {{"config", meta}, {"results", results}});
      break;
    }

    case RunMode::invariance: {
      double T = cfg.times().front();
      FitAtT f = fit_at(cfg, spec, T);
      InvarianceOptions opts;
      opts.n_states = cfg.n_states;
      opts.n_t = cfg.n_t;
      opts.exec = cfg.exec();
      opts.seed = cfg.seed;
      nlohmann::json reports = nlohmann::json::array();
      for (double alpha : cfg.alphas) {
        InvarianceReport rep =
            invariance_report(cfg.system, f.act, ScaleTransform{alpha}, cfg.window, opts);
        reports.push_back(invariance_to_json(rep));
        std::cout << "alpha=" << alpha << " dG_rel_max=" << format_g17(rep.dG_rel_max)
                  << " dSigma_max=" << format_g17(rep.dSigma_max)
                  << " dProduct_rel=" << format_g17(rep.dProduct_rel) << "\n";
      }
      write_json_file(join_path(cfg.output_dir, "invariance.json"),
                      {{"config", meta}, {"reports", reports}});
      break;
    }

    case RunMode::sweep: {
      QuantumAction fk =
          reconstruct_fk(*spec, cfg.m_tilde_gauge, cfg.window, cfg.basis_degrees);
      std::ostringstream os;
      os << "# finite-T fits approaching the ground-state limit\n";
      os << "# config " << meta.dump() << "\n";
      os << "T,residual_rms,residual_max,coeff_distance_to_fk\n";
      std::vector<double> ts = cfg.times();
      std::sort(ts.begin(), ts.end());
      for (double T : ts) {
        FitAtT f = fit_at(cfg, spec, T);
        double d2 = 0.0, n2 = 0.0;
        for (int d : cfg.basis_degrees) {
          double cf = f.act.potential_tilde.coeffs[d];
          double ck = fk.potential_tilde.coeffs[d];
          d2 += (cf - ck) * (cf - ck);
          n2 += ck * ck;
        }
        double dist = std::sqrt(d2 / n2);
        os << format_g17(T) << ',' << format_g17(f.rep.residual_rms) << ','
           << format_g17(f.rep.residual_max) << ',' << format_g17(dist) << "\n";
        std::cout << "T=" << time_tag(T) << " residual_rms=" << format_g17(f.rep.residual_rms)
                  << " distance_to_fk=" << format_g17(dist) << "\n";
      }
      write_text_file(join_path(cfg.output_dir, "sweep.csv"), os.str());
      break;
    }
  }
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    run_impl(cfg);
    return 0;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace qaction
