// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "cli.hpp"
#include "icanclean/cleaner.hpp"
#include "icanclean/recording_io.hpp"
#include "icanclean/report.hpp"
#include "icanclean/synth_bench.hpp"
#include "test_util.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace icanclean;
using namespace icanclean::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

double max_abs(const MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CleanConfig with_thresh(double t) {
  CleanConfig c;
  c.thresh = t;
  return c;
}

// 1. Canonical correlations agree with the covariance eigenproblem.
void cca_oracle(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const Eigen::Index t = 10 + static_cast<Eigen::Index>((k * 37) % 191);
    const Eigen::Index nx = 1 + static_cast<Eigen::Index>(k % 4);
    const Eigen::Index ny = 1 + static_cast<Eigen::Index>((k / 4) % 2);
    MatrixXd x = random_normal(t, nx, 5000 + k, 1.0);
    MatrixXd y = random_normal(t, ny, 6000 + k, -1.0);
    y.col(0) += (0.2 * static_cast<double>(k % 5)) * x.col(nx - 1);
    const VectorXd got = canoncorr(x, y).correlations;
    const VectorXd want = oracle_canonical_correlations(x, y);
    if (got.size() != want.size()) {
      o.require(false, "component count mismatch at instance " + std::to_string(k));
      continue;
    }
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
  }
  const double elapsed = seconds_since(t0);
  o.require(worst < 1e-8, "max deviation " + std::to_string(worst));
  o.require(elapsed < 10.0, "runtime " + std::to_string(elapsed) + " s");
  o.detail << "50 instances, max |dR| = " << worst << ", " << elapsed << " s";
}

// 2. Every intermediate satisfies the four step equations.
void pipeline_literal(Outcome& o) {
  ScenarioParams p;
  p.n_samples = 600;
  p.n_data = 6;
  p.n_noise_channels = 3;
  p.n_signal_sources = 3;
  p.n_noise_sources = 3;
  p.ref_sensor_noise_level = 0.8;
  p.seed = 2024;
  const Scenario sc = generate_scenario(p);
  const MatrixXd& x = sc.x.samples;
  const MatrixXd& y = sc.y.samples;
  const double thresh = 0.6;
  const auto tr = run_pipeline(x, y, with_thresh(thresh));

  const MatrixXd x_mc = x.rowwise() - x.colwise().mean();
  const MatrixXd y_mc = y.rowwise() - y.colwise().mean();
  const double e_u = max_abs(x_mc * tr.cca.a_unmix - tr.cca.u_variates);
  const double e_v = max_abs(y_mc * tr.cca.b_unmix - tr.cca.v_variates);
  o.require(e_u < 1e-10, "U != X_MC*A");
  o.require(e_v < 1e-10, "V != Y_MC*B");

  std::vector<Eigen::Index> expected_sel;
  for (Eigen::Index i = 0; i < tr.cca.correlations.size(); ++i) {
    if (tr.cca.correlations(i) * tr.cca.correlations(i) >= thresh) expected_sel.push_back(i);
  }
  o.require(tr.selection.bad_indices == expected_sel, "selection != {i : R_i^2 >= Thresh}");
  o.require(!expected_sel.empty() && expected_sel.size() < static_cast<std::size_t>(tr.cca.n_comp),
            "instance should select a proper subset");
  MatrixXd activity(x.rows(), static_cast<Eigen::Index>(expected_sel.size()));
  for (std::size_t k = 0; k < expected_sel.size(); ++k)
    activity.col(static_cast<Eigen::Index>(k)) = tr.cca.u_variates.col(expected_sel[k]);
  o.require(tr.selection.bad_activity == activity, "BadCompActivity != U(:, BadCompList)");

  const double e_proj = max_abs(tr.noise.projection - oracle_normal_equations(activity, x_mc));
  const double e_noise = max_abs(tr.noise.projected_noise - activity * tr.noise.projection);
  const double e_clean = max_abs(tr.x_clean - (x - tr.noise.projected_noise));
  o.require(e_proj < 1e-8, "ProjectionMatrix is not the least-squares solution");
  o.require(e_noise < 1e-10, "ProjectedNoise != BadCompActivity*ProjectionMatrix");
  o.require(e_clean == 0.0, "X_Clean != X - ProjectedNoise");
  o.detail << "n_comp=" << tr.cca.n_comp << " n_bad=" << tr.selection.n_bad() << " |U-X_MC*A|=" << e_u
           << " |V-Y_MC*B|=" << e_v << " |P-P_ls|=" << e_proj;
}

// 3. N_Comp = min(rank(X), rank(Y)) on constructed rank-deficient inputs.
void rank_law(Outcome& o) {
  int ok = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Eigen::Index t = 120;
    const Eigen::Index nx = 3 + static_cast<Eigen::Index>(k % 6);
    const Eigen::Index ny = 2 + static_cast<Eigen::Index>((k * 5) % 5);
    const Eigen::Index rx = 1 + static_cast<Eigen::Index>((k * 3) % static_cast<std::uint64_t>(nx));
    const Eigen::Index ry = 1 + static_cast<Eigen::Index>((k * 7) % static_cast<std::uint64_t>(ny));
    MatrixXd x, y;
    if (k % 2 == 0) {
      // embedded low-rank factors
      x = random_normal(t, rx, 100 + k) * random_normal(rx, nx, 200 + k);
      y = random_normal(t, ry, 300 + k) * random_normal(ry, ny, 400 + k);
    } else {
      // duplicated columns
      x = random_normal(t, nx, 500 + k);
      for (Eigen::Index j = rx; j < nx; ++j) x.col(j) = x.col(j % rx);
      y = random_normal(t, ny, 600 + k);
      for (Eigen::Index j = ry; j < ny; ++j) y.col(j) = -2.0 * y.col(j % ry);
    }
    x.rowwise() += RowVector<double>::LinSpaced(nx, 1.0, 4.0) * x.colwise().mean().cwiseAbs().sum();
    const auto rank_x = estimate_rank(mean_center(x).centered);
    const auto rank_y = estimate_rank(mean_center(y).centered);
    const auto r = canoncorr(x, y);
    const bool good = r.n_comp == std::min(rank_x, rank_y) && rank_x == rx && rank_y == ry;
    if (good) ++ok;
    else o.require(false, "case " + std::to_string(k));
  }
  o.detail << ok << "/20 cases with n_comp = min(rank X, rank Y)";
}

// 4. Ground-truth recovery on the default scenario.
void ground_truth(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioParams p;  // 64 data, 8 noise channels, 4 + 8 sources, T = 20000, noiseless reference
  const Scenario sc = generate_scenario(p);
  const auto out = clean_batch(sc.x, sc.y, with_thresh(0.5));
  const auto s = score_cleaning(sc.x, out.x_clean, sc.truth);
  const double elapsed = seconds_since(t0);
  o.require(s.mean_corr_clean >= 0.99, "mean correlation below 0.99");
  o.require(s.mean_snr_improvement_db > 20.0, "SNR improvement not above 20 dB");
  o.require(elapsed < 30.0, "runtime over 30 s");
  o.detail << "mean corr " << std::setprecision(8) << s.mean_corr_clean << " (raw " << s.mean_corr_raw
           << "), mean SNR improvement " << s.mean_snr_improvement_db << " dB, " << out.report.bad_indices.size()
           << " removed, " << std::setprecision(3) << elapsed << " s";
}

// 5. Invariants, each over 20 seeded cases.
void invariance_suite(Outcome& o) {
  int affine = 0, mean_pres = 0, ortho = 0, var_mono = 0, empty_id = 0, idem = 0, filt = 0;
  const int n_cases = 20;
  for (int k = 0; k < n_cases; ++k) {
    ScenarioParams p;
    p.n_samples = 500 + 25 * k;
    p.n_data = 5 + k % 4;
    p.n_noise_channels = 2 + k % 2;
    p.n_signal_sources = 3;
    p.n_noise_sources = 2;
    p.ref_sensor_noise_level = 0.2 + 0.05 * k;
    p.seed = 9000 + static_cast<std::uint64_t>(k);
    const Scenario sc = generate_scenario(p);
    MatrixXd x = sc.x.samples;
    x.rowwise() += RowVector<double>::LinSpaced(x.cols(), -10.0, 3.0);
    const MatrixXd& y = sc.y.samples;
    const CleanConfig cfg = with_thresh(0.5);
    const auto tr = run_pipeline(x, y, cfg);

    // affine channel maps leave the correlations unchanged
    const Eigen::Index nx = x.cols(), ny = y.cols();
    const MatrixXd mx = random_normal(nx, nx, 70 + k) + 4.0 * MatrixXd::Identity(nx, nx);
    const MatrixXd my = random_normal(ny, ny, 80 + k) + 4.0 * MatrixXd::Identity(ny, ny);
    MatrixXd xa = x * mx;
    xa.rowwise() += RowVector<double>::Constant(nx, 3.0);
    MatrixXd ya = y * my;
    ya.rowwise() -= RowVector<double>::Constant(ny, 7.0);
    if ((canoncorr(xa, ya).correlations - tr.cca.correlations).cwiseAbs().maxCoeff() < 1e-8) ++affine;

    const MatrixXd& xc = tr.x_clean;
    const double scale = x.cwiseAbs().maxCoeff();
    if ((xc.colwise().mean() - x.colwise().mean()).cwiseAbs().maxCoeff() < 1e-10 * scale) ++mean_pres;

    const MatrixXd resid = xc.rowwise() - xc.colwise().mean();
    const MatrixXd inner = tr.selection.bad_activity.transpose() * resid;
    if (tr.selection.n_bad() > 0 &&
        inner.cwiseAbs().maxCoeff() / (tr.selection.bad_activity.norm() * resid.norm()) < 1e-8)
      ++ortho;

    bool mono = true;
    for (Eigen::Index j = 0; j < x.cols(); ++j) mono = mono && sample_var(xc.col(j)) <= sample_var(x.col(j)) + 1e-10;
    if (mono) ++var_mono;

    const double max_r2 = tr.cca.correlations(0) * tr.cca.correlations(0);
    const auto none = clean_batch(x, y, with_thresh(std::min(1.0, std::nextafter(max_r2, 2.0))));
    if (none.report.bad_indices.empty() && none.x_clean == x) ++empty_id;

    if (clean_batch(xc, y, cfg).report.bad_indices.empty()) ++idem;

    const auto f = fit_spatial_filter(x, y, cfg);
    if (max_abs(apply_spatial_filter(x, f) - xc) < 1e-10 * std::max(1.0, scale)) ++filt;
  }
  auto req = [&](int count, const char* name) {
    o.require(count == n_cases, std::string(name) + " " + std::to_string(count) + "/20");
  };
  req(affine, "affine invariance");
  req(mean_pres, "mean preservation");
  req(ortho, "residual orthogonality");
  req(var_mono, "variance monotonicity");
  req(empty_id, "empty-selection identity");
  req(idem, "idempotence");
  req(filt, "filter/batch equivalence");
  if (o.pass) o.detail << "7 invariants x 20 cases";
}

// 6. Sliding windows: one window is batch; transient noise is found only where present.
void sliding(Outcome& o) {
  ScenarioParams p;
  p.n_samples = 3000;
  p.n_data = 12;
  p.n_noise_channels = 3;
  p.n_noise_sources = 3;
  p.ref_sensor_noise_level = 0.1;
  p.seed = 31;
  const Scenario sc = generate_scenario(p);
  CleanConfig c = with_thresh(0.5);
  c.window_len = p.n_samples;
  c.window_hop = p.n_samples;
  const double dev = max_abs(clean_sliding(sc.x.samples, sc.y.samples, c).x_clean -
                             clean_batch(sc.x.samples, sc.y.samples, with_thresh(0.5)).x_clean);
  o.require(dev < 1e-10, "window = T deviates from batch by " + std::to_string(dev));

  ScenarioParams q;
  q.n_samples = 4000;
  q.n_data = 16;
  q.n_noise_channels = 4;
  q.n_signal_sources = 4;
  q.n_noise_sources = 2;
  q.ref_sensor_noise_level = 0.1;
  q.noise_onset = 2000;
  q.seed = 5;
  const Scenario tr = generate_scenario(q);
  CleanConfig w = with_thresh(0.7);
  w.window_len = 500;
  const auto s = clean_sliding(tr.x.samples, tr.y.samples, w);
  int clean_windows = 0, noisy_windows = 0, clean_ok = 0, noisy_ok = 0;
  for (const auto& win : s.report.windows) {
    if (win.start + win.length <= q.noise_onset) {
      ++clean_windows;
      if (win.bad_indices.empty()) ++clean_ok;
    } else if (win.start >= q.noise_onset) {
      ++noisy_windows;
      if (!win.bad_indices.empty()) ++noisy_ok;
    }
  }
  o.require(clean_windows == 4 && clean_ok == clean_windows, "clean-half windows selected components");
  o.require(noisy_windows == 4 && noisy_ok == noisy_windows, "noisy-half windows missed the noise");
  o.detail << "window=T deviation " << dev << "; clean-half windows with 0 removed " << clean_ok << "/"
           << clean_windows << ", noisy-half windows with >=1 removed " << noisy_ok << "/" << noisy_windows;
}

// 7. Throughput on the real-time profile.
void throughput(Outcome& o) {
  BenchParams b;
  b.n_samples = 100000;
  b.n_data = 64;
  b.n_noise = 8;
  b.window_len = 500;
  b.sampling_rate_hz = 500.0;
  b.repetitions = 1;
  const BenchReport r = benchmark_throughput(b);
  o.require(r.batch_seconds < 5.0, "batch took " + std::to_string(r.batch_seconds) + " s");
  o.require(r.sliding_realtime_factor >= 10.0, "sliding at " + std::to_string(r.sliding_realtime_factor) + "x real time");
  o.detail << "batch " << r.batch_seconds << " s (" << r.batch_samples_per_second << " samples/s); sliding "
           << r.sliding_windows << " windows in " << r.sliding_seconds << " s = " << r.sliding_realtime_factor
           << "x real time";
}

// 8. CLI output equals the library; error paths give their exit codes.
void cli_conformance(Outcome& o) {
  TempDir dir("acceptance");
  const std::filesystem::path fx = ICANCLEAN_FIXTURE_DIR;
  const auto data = (fx / "data.csv").string();
  const auto noise = (fx / "noise.csv").string();
  std::ostringstream sink_out, sink_err;
  auto run = [&](std::vector<std::string> args) { return cli::run(args, sink_out, sink_err); };

  int code = run({"clean", "--data", data, "--noise", noise, "--out", dir.file("batch.csv"), "--thresh", "0.5",
                  "--report", dir.file("batch.txt")});
  o.require(code == 0, "batch clean exit " + std::to_string(code));
  const Recording x = read_recording(data);
  const Recording y = read_recording(noise);
  if (code == 0) {
    const auto lib = clean_batch(x, y, with_thresh(0.5));
    o.require(read_recording(dir.file("batch.csv")).samples == lib.x_clean.samples, "batch output differs");
    std::ifstream in(fx / "expected.txt");
    std::stringstream expected_text;
    expected_text << in.rdbuf();
    std::ifstream rin(dir.file("batch.txt"));
    std::stringstream report_text;
    report_text << rin.rdbuf();
    const auto expected = parse_report(expected_text.str());
    const auto report = parse_report(report_text.str());
    o.require(report.at("n_bad") == expected.at("n_bad"), "fixture n_bad differs from recorded value");
  }

  code = run({"clean", "--data", data, "--noise", noise, "--out", dir.file("slide.csv"), "--thresh", "0.5",
              "--window", "250"});
  o.require(code == 0, "sliding clean exit " + std::to_string(code));
  if (code == 0) {
    CleanConfig c = with_thresh(0.5);
    c.window_len = 250;
    o.require(read_recording(dir.file("slide.csv")).samples == clean_sliding(x, y, c).x_clean.samples,
              "sliding output differs");
  }

  {
    std::ofstream bad(dir.file("bad.csv"));
    bad << "time,a\n0,1\n1,x\n";
    Recording tiny{random_normal(4, 8, 1), numbered_labels("X", 8), 1.0};
    write_recording(tiny, dir.file("tiny.csv"));
    Recording tiny_y{random_normal(4, 1, 2), numbered_labels("Y", 1), 1.0};
    write_recording(tiny_y, dir.file("tiny_y.csv"));
  }
  const auto out = dir.file("never.csv");
  const std::vector<std::pair<std::vector<std::string>, int>> errors = {
      {{"clean", "--data", data, "--out", out, "--thresh", "0.5"}, cli::kExitUsage},
      {{"clean", "--data", data, "--noise", noise, "--out", out, "--thresh", "2"}, cli::kExitUsage},
      {{"clean", "--data", data, "--noise", noise, "--out", out, "--thresh", "0.5", "--window", "3"}, cli::kExitUsage},
      {{"synth", "--data-channels", "0", "--out-data", out, "--out-noise", out}, cli::kExitUsage},
      {{"clean", "--data", dir.file("bad.csv"), "--noise", noise, "--out", out, "--thresh", "0.5"}, cli::kExitParse},
      {{"clean", "--data", dir.file("nope.csv"), "--noise", noise, "--out", out, "--thresh", "0.5"}, cli::kExitParse},
      {{"clean", "--data", dir.file("tiny.csv"), "--noise", dir.file("tiny_y.csv"), "--out", out, "--thresh", "0.5"},
       cli::kExitNumeric},
  };
  int matched = 0;
  for (const auto& [args, want] : errors) {
    sink_err.str("");
    const int got = run(args);
    if (got == want && !sink_err.str().empty()) ++matched;
    else o.require(false, args[0] + " case exit " + std::to_string(got) + " want " + std::to_string(want));
  }
  o.require(!std::filesystem::exists(out), "failed run left an output file");
  o.detail << "batch and sliding outputs equal library; " << matched << "/" << errors.size()
           << " error paths with expected exit codes";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"AC1 CCA oracle equivalence", cca_oracle},
      {"AC2 step-pipeline literal conformance", pipeline_literal},
      {"AC3 rank law", rank_law},
      {"AC4 ground-truth recovery", ground_truth},
      {"AC5 invariance suite", invariance_suite},
      {"AC6 sliding-window degeneracy", sliding},
      {"AC7 throughput", throughput},
      {"AC8 CLI conformance", cli_conformance},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail.str() << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
