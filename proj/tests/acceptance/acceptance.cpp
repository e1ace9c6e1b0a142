/*
 * SPDX-FileCopyrightText: Copyright 2026 The Mercury Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Acceptance runner: one PASS/FAIL line per criterion. Criteria 1-6 are
// oracle and property suites; 7-10 train on a scaled synthetic dataset and
// 11 repeats that run and compares the report bytes.
//
// usage: acceptance [work_dir]

#include "mercury/experiment.hpp"
#include "mercury/seq2seq/attention.hpp"
#include "mercury/seq2seq/ctc.hpp"
#include "mercury/seq2seq/layers.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;
using namespace mercury;
using seq2seq::Mat;
using seq2seq::ModelKind;

namespace {

// Pinned tolerances and budgets.
constexpr double kCtcProbTol = 1e-10;
constexpr double kGradTol = 1e-4;
constexpr double kOracleBudgetSec = 60.0;
constexpr double kGradBudgetSec = 120.0;
constexpr int kCalibrationSlack = 2;
constexpr double kOhmTol = 1e-12;
constexpr double kMomentTol = 1e-6;
constexpr double kAffineTol = 1e-9;
constexpr double kRnnOerMax = 0.10;
constexpr double kTfOerMax = 0.20;
constexpr double kNoiseRatio = 3.0;
constexpr double kNoiseFloor = 0.3;
constexpr double kHitRateMin = 0.5;
constexpr double kEarlyShareMin = 0.5;

// Scaled reproduction setup.
constexpr int kSeed = 7;
constexpr int kArchs = 40;
constexpr int kTracesPerArch = 30;
constexpr int kRnnEpochs = 40;
constexpr int kRnnBatch = 16;
constexpr double kRnnLr = 2e-3;
constexpr int kTfEpochs = 15;
constexpr int kTfBatch = 32;
constexpr double kTfLr = 1e-3;

struct Verdict {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1 -------------------------------------------------------------------------

Verdict ctc_oracle() {
    Stopwatch sw;
    Rng rng = make_rng(kSeed, "accept-ctc");
    std::uniform_int_distribution<int> tdist(1, 6), vdist(2, 4), ldist(0, 3);
    double worst_p = 0;
    int cases = 0;
    while (cases < 1000) {
        const int T = tdist(rng), V = vdist(rng), blank = V - 1;
        std::uniform_int_distribution<int> sym(0, V - 2);
        std::vector<int> y(static_cast<std::size_t>(ldist(rng)));
        for (auto &s : y)
            s = sym(rng);
        if (seq2seq::ctc_min_length(y) > T)
            continue;
        const Mat<double> lp = oracle::random_log_probs(T, V, rng);
        const double p = std::exp(-seq2seq::ctc_loss(lp, y, blank).loss);
        worst_p = std::max(worst_p, std::abs(p - oracle::ctc_prob_brute(lp, y, blank)));
        ++cases;
    }
    double worst_g = 0;
    for (int k = 0; k < 100; ++k) {
        const int T = tdist(rng), V = vdist(rng), blank = V - 1;
        std::uniform_int_distribution<int> sym(0, V - 2);
        std::vector<int> y(static_cast<std::size_t>(ldist(rng)));
        for (auto &s : y)
            s = sym(rng);
        if (seq2seq::ctc_min_length(y) > T)
            continue;
        Mat<double> lp = oracle::random_log_probs(T, V, rng);
        const Mat<double> g = seq2seq::ctc_loss(lp, y, blank).grad;
        worst_g = std::max(worst_g,
                           oracle::max_fd_error([&] { return seq2seq::ctc_loss(lp, y, blank).loss; }, lp, g));
    }
    const double t = sw.seconds();
    return {worst_p <= kCtcProbTol && worst_g < kGradTol && t < kOracleBudgetSec,
            std::to_string(cases) + " cases, max |dP| " + fmt("%.2e", worst_p) + ", grad rel err " +
                fmt("%.2e", worst_g) + ", " + fmt("%.1f", t) + " s"};
}

// 2 -------------------------------------------------------------------------

Verdict decoder_oracle() {
    Stopwatch sw;
    Rng rng = make_rng(kSeed, "accept-beam");
    std::uniform_int_distribution<int> tdist(1, 5), vdist(2, 4);
    int beam_ok = 0, beam_cases = 0, skipped = 0;
    while (beam_cases < 500) {
        const int T = tdist(rng), V = vdist(rng);
        const Mat<double> lp = oracle::random_log_probs(T, V, rng);
        const auto [best, gap] = oracle::best_collapsed(lp, V - 1);
        if (gap < 1e-9) {
            ++skipped; // exact ties have no unique answer
            continue;
        }
        const int width = static_cast<int>(std::pow(V, T)) + 1;
        beam_ok += seq2seq::ctc_beam_decode(lp, width, V - 1) == best;
        ++beam_cases;
    }
    std::uniform_int_distribution<int> tlong(1, 30), vbig(2, 17);
    int greedy_ok = 0;
    for (int k = 0; k < 1000; ++k) {
        const int V = vbig(rng);
        const Mat<double> lp = oracle::random_log_probs(tlong(rng), V, rng);
        greedy_ok += seq2seq::ctc_beam_decode(lp, 1, V - 1) == seq2seq::ctc_greedy_decode(lp, V - 1);
    }
    const double t = sw.seconds();
    return {beam_ok == 500 && greedy_ok == 1000 && t < kOracleBudgetSec,
            "saturating beam " + std::to_string(beam_ok) + "/500 (" + std::to_string(skipped) +
                " ties skipped), width 1 " + std::to_string(greedy_ok) + "/1000, " + fmt("%.1f", t) + " s"};
}

// 3 -------------------------------------------------------------------------

Verdict edit_distance_oracle() {
    Stopwatch sw;
    const auto seqs = oracle::all_sequences(6, 3);
    std::size_t bad = 0, pairs = 0;
    for (const auto &a : seqs)
        for (const auto &b : seqs) {
            bad += levenshtein(a, b) != oracle::levenshtein_naive(a, b);
            ++pairs;
        }
    const LabelSeq truth = labels_of(ArchSpec{{LayerSpec::conv(5, 10), LayerSpec::fc(100)}});
    const bool example = truth == LabelSeq{9, 13} && oer(truth, truth) == 0.0 &&
                         oer(LabelSeq{9}, truth) == 0.5 && oer(LabelSeq{}, truth) == 1.0;
    return {bad == 0 && example, std::to_string(pairs) + " pairs, " + std::to_string(bad) +
                                     " mismatches, [9,13] example " + (example ? "ok" : "wrong") + ", " +
                                     fmt("%.1f", sw.seconds()) + " s"};
}

// 4 -------------------------------------------------------------------------

using seq2seq::ParameterSet;
using oracle::max_fd_error;
using oracle::probe;
using oracle::random_matrix;

// Worst relative error over the input gradients and every parameter.
struct GradCheck {
    double worst = 0;

    void input(const std::function<Mat<double>()> &f, Mat<double> &x, const Mat<double> &dx, const Mat<double> &r) {
        worst = std::max(worst, max_fd_error([&] { return probe(f(), r); }, x, dx));
    }
    void params(ParameterSet<double> &ps, const std::function<Mat<double>()> &f, const Mat<double> &r) {
        for (auto &p : ps) {
            const Mat<double> g = p.grad;
            worst = std::max(worst, max_fd_error([&] { return probe(f(), r); }, p.value, g));
        }
    }
};

Verdict gradient_suite() {
    Stopwatch sw;
    Rng rng = make_rng(kSeed, "accept-grad");
    std::vector<std::pair<std::string, double>> errs;

    {
        ParameterSet<double> ps;
        seq2seq::Conv1d<double> conv(ps, "c", 3, 4, 3, 2, rng);
        Mat<double> x = random_matrix(11 * 2, 3, rng);
        typename seq2seq::Conv1d<double>::Cache cache;
        const Mat<double> y = conv.forward(ps, x, 2, &cache);
        const Mat<double> r = random_matrix(y.rows(), y.cols(), rng);
        const Mat<double> dx = conv.backward(ps, cache, r);
        auto f = [&] { return conv.forward(ps, x, 2, nullptr); };
        GradCheck c;
        c.input(f, x, dx, r);
        c.params(ps, f, r);
        errs.emplace_back("conv1d", c.worst);
    }
    {
        ParameterSet<double> ps;
        seq2seq::BiGru<double> rnn(ps, "b", 2, 3, rng);
        Mat<double> x = random_matrix(5 * 3, 2, rng);
        typename seq2seq::BiGru<double>::Cache cache;
        const Mat<double> y = rnn.forward(ps, x, 3, &cache);
        const Mat<double> r = random_matrix(y.rows(), y.cols(), rng);
        const Mat<double> dx = rnn.backward(ps, cache, r);
        auto f = [&] { return rnn.forward(ps, x, 3, nullptr); };
        GradCheck c;
        c.input(f, x, dx, r);
        c.params(ps, f, r);
        errs.emplace_back("bigru", c.worst);
    }
    {
        ParameterSet<double> ps;
        seq2seq::Linear<double> lin(ps, "l", 5, 3, rng);
        Mat<double> x = random_matrix(4, 5, rng);
        const Mat<double> r = random_matrix(4, 3, rng);
        const Mat<double> dx = lin.backward(ps, x, r);
        auto f = [&] { return lin.forward(ps, x); };
        GradCheck c;
        c.input(f, x, dx, r);
        c.params(ps, f, r);
        errs.emplace_back("linear", c.worst);
    }
    {
        ParameterSet<double> ps;
        seq2seq::LayerNorm<double> ln(ps, "n", 6);
        ps[0].value = random_matrix(1, 6, rng);
        ps[1].value = random_matrix(1, 6, rng);
        Mat<double> x = random_matrix(5, 6, rng);
        typename seq2seq::LayerNorm<double>::Cache cache;
        ln.forward(ps, x, &cache);
        const Mat<double> r = random_matrix(5, 6, rng);
        const Mat<double> dx = ln.backward(ps, cache, r);
        auto f = [&] { return ln.forward(ps, x, nullptr); };
        GradCheck c;
        c.input(f, x, dx, r);
        c.params(ps, f, r);
        errs.emplace_back("layer_norm", c.worst);
    }
    for (const bool causal : {false, true}) {
        ParameterSet<double> ps;
        seq2seq::MultiHeadAttention<double> att(ps, "a", 8, 2, rng);
        Mat<double> q = random_matrix(4, 8, rng);
        Mat<double> kv = random_matrix(causal ? 4 : 6, 8, rng);
        typename seq2seq::MultiHeadAttention<double>::Cache cache;
        const Mat<double> y = att.forward(ps, q, kv, causal, &cache);
        const Mat<double> r = random_matrix(y.rows(), y.cols(), rng);
        auto [dq, dkv] = att.backward(ps, cache, r);
        auto f = [&] { return att.forward(ps, q, kv, causal, nullptr); };
        GradCheck c;
        c.input(f, q, dq, r);
        c.input(f, kv, dkv, r);
        c.params(ps, f, r);
        errs.emplace_back(causal ? "self_attention" : "cross_attention", c.worst);
    }
    {
        ParameterSet<double> ps;
        seq2seq::Embedding<double> emb(ps, "e", 7, 4, rng);
        const std::vector<int> tokens{1, 3, 3, 6, 0};
        const Mat<double> r = random_matrix(5, 4, rng);
        emb.backward(ps, tokens, r);
        GradCheck c;
        c.params(ps, [&] { return emb.forward(ps, tokens); }, r);
        errs.emplace_back("embedding", c.worst);
    }

    double worst = 0;
    std::string detail;
    for (const auto &[name, e] : errs) {
        worst = std::max(worst, e);
        detail += name + " " + fmt("%.1e", e) + ", ";
    }
    const double t = sw.seconds();
    return {worst < kGradTol && t < kGradBudgetSec, detail + fmt("%.1f", t) + " s"};
}

// 5 -------------------------------------------------------------------------

Verdict sensor_physics() {
    const SimParams sim;
    const PdnParams pdn;
    const TdcConfig c = calibrate_sensor(TdcConfig{}, sim, pdn);
    const double idle_delay = delay_of(idle_voltage_drop(sim, pdn), c.base_delay, pdn.v_nominal).delay;
    const int idle = taps_reached(idle_delay, c, c.clock_period);
    const bool calib = std::abs(idle - c.tap_count / 2) <= kCalibrationSlack;

    Rng rng = make_rng(kSeed, "accept-sensor");
    bool monotone = true;
    std::uint64_t prev = std::numeric_limits<std::uint64_t>::max();
    for (int level = 0; level < 20; ++level) {
        const std::vector<double> i(400, sim.baseline + 0.5 * level);
        const auto v = apply_placement(pdn_response(i, pdn), default_placement(PlacementName::Original), rng);
        const auto s = std::get<std::uint64_t>(tdc_readout(delay_of(v.back(), c.base_delay, pdn.v_nominal).delay, c,
                                                           c.clock_period));
        monotone = monotone && s <= prev;
        prev = s;
    }

    PdnParams ohm = pdn;
    ohm.inductance = 0.0;
    ohm.capacitance = 1e-300;
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<double> cur(2000);
    for (auto &x : cur)
        x = u(rng);
    const auto v = pdn_response(cur, ohm);
    double worst = 0;
    for (std::size_t t = 0; t < cur.size(); ++t)
        worst = std::max(worst, std::abs(v[t] - cur[t] * ohm.resistance));

    return {calib && monotone && worst <= kOhmTol,
            "idle Sum " + std::to_string(idle) + " of " + std::to_string(c.tap_count) + ", 20-level sweep " +
                (monotone ? "monotone" : "NOT monotone") + ", L=0 max err " + fmt("%.1e", worst)};
}

// 6 -------------------------------------------------------------------------

Verdict preprocessing() {
    bool ok = true;
    std::string why;
    auto need = [&](bool c, const char *what) {
        if (!c && ok)
            why = what;
        ok = ok && c;
    };

    RawTrace t;
    t.samples.resize(310000);
    for (std::size_t i = 0; i < t.samples.size(); ++i)
        t.samples[i] = static_cast<std::uint16_t>(i % 129);
    const auto c = crop(t);
    need(c.size() == 150000 && c.front() == 50000 % 129 && c.back() == 199999 % 129, "crop window");
    t.samples.resize(200000);
    need(crop(t).size() == 150000, "crop boundary");
    t.samples.resize(199999);
    bool threw = false;
    try {
        crop(t);
    } catch (const DatasetError &) {
        threw = true;
    }
    need(threw, "short trace accepted");

    std::vector<double> idx(kCropLen);
    std::iota(idx.begin(), idx.end(), 0.0);
    const ReducedTrace r = shape_and_reduce(idx);
    need(r.rows() == 3 && r.cols() == 1000, "reduced shape");
    for (int row = 0; row < 3; ++row)
        for (int j = 0; j < 1000; ++j)
            need(r(row, j) == row * 50000.0 + 50.0 * j + 24.5, "index closed form");
    need((shape_and_reduce(std::vector<double>(kCropLen, 3.5)).array() == 3.5).all(), "constant input");

    Rng rng = make_rng(kSeed, "accept-prep");
    std::uniform_real_distribution<double> u(0.0, 128.0), a(0.1, 10.0), b(-50.0, 50.0);
    std::vector<double> x(kCropLen);
    for (auto &v : x)
        v = u(rng);
    const ReducedTrace rx = shape_and_reduce(x);
    for (int row = 0; row < 3; ++row) {
        const double in = std::accumulate(x.begin() + row * kRowLen, x.begin() + (row + 1) * kRowLen, 0.0);
        need(std::abs(rx.row(row).sum() * kReduceFactor - in) <= 1e-9 * in, "row sums");
    }

    double worst_affine = 0;
    for (int k = 0; k < 20; ++k) {
        Eigen::MatrixXd m(3, 1000);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = u(rng);
        const Eigen::MatrixXd n = normalize(m);
        const double mean = n.mean();
        const double sd = std::sqrt((n.array() - mean).square().mean());
        need(std::abs(mean) < kMomentTol && std::abs(sd - 1.0) < kMomentTol, "moments");
        const Eigen::MatrixXd n2 = normalize((a(rng) * m.array() + b(rng)).matrix());
        worst_affine = std::max(worst_affine, (n2 - n).cwiseAbs().maxCoeff());
    }
    need(worst_affine < kAffineTol, "affine invariance");
    return {ok, ok ? "crop [50000,200000), 3x50000 -> 3x1000 means, moments and affine invariance (max " +
                         fmt("%.1e", worst_affine) + ")"
                   : "failed: " + why};
}

// 7-11 ----------------------------------------------------------------------

struct RunOutcome {
    double rnn_oer = 0, tf_oer = 0;
    std::vector<NoiseRow> noise;
    std::map<ModelKind, std::vector<PlacementRow>> placement;
    LocalizationSummary loc;
    std::map<std::string, std::string> reports; // file name -> bytes
};

RunConfig repro_config(ModelKind kind) {
    RunConfig cfg;
    cfg.set("seed", std::to_string(kSeed));
    cfg.set("data.n_arch", std::to_string(kArchs));
    cfg.set("data.traces_per_arch", std::to_string(kTracesPerArch));
    cfg.set("data.augment_fraction", "0.1");
    cfg.set("data.augment_placements", "all");
    cfg.set("rnn.conv_layers", "3");
    cfg.set("rnn.dim", "128");
    const bool rnn = kind == ModelKind::RnnCtc;
    cfg.set("model.kind", rnn ? "rnn-ctc" : "transformer");
    cfg.set("train.epochs", std::to_string(rnn ? kRnnEpochs : kTfEpochs));
    cfg.set("train.batch_size", std::to_string(rnn ? kRnnBatch : kTfBatch));
    cfg.set("train.lr_max", format_real(rnn ? kRnnLr : kTfLr));
    return cfg;
}

std::string to_csv(const std::function<void(std::ostream &)> &body) {
    std::ostringstream os;
    body(os);
    return os.str();
}

seq2seq::EpochCallback progress(const std::string &tag) {
    return [tag](const seq2seq::EpochStats &s) {
        if (s.epoch % 5 == 0)
            std::cerr << "  " << tag << " epoch " << s.epoch << " train_loss " << format_real(s.train_loss)
                      << " test_oer " << format_real(s.test_oer) << '\n';
    };
}

RunOutcome reproduce(const std::string &dir) {
    Stopwatch sw;
    RunOutcome out;
    const RunConfig rcfg = repro_config(ModelKind::RnnCtc);
    const RunConfig tcfg = repro_config(ModelKind::Transformer);
    fs::remove_all(dir);
    const std::string data = (fs::path(dir) / "data").string();
    build_dataset(rcfg.dataset(), data);
    const Dataset ds = load_dataset(data);
    std::cerr << "  dataset " << ds.manifest.entries.size() << " traces, " << fmt("%.0f", sw.seconds()) << " s\n";

    const InputSet base = make_inputs(ds, train_rows(ds, false));
    const InputSet aug = make_inputs(ds, train_rows(ds, true));
    const auto test_idx = test_rows(ds);
    const InputSet test = make_inputs(ds, test_idx);
    const std::vector<PlacementName> places(std::begin(kAllPlacements), std::end(kAllPlacements));

    auto run_kind = [&](ModelKind kind, const RunConfig &cfg, const std::string &tag) {
        TrainedModel plain = train_extractor(cfg, kind, base, test, progress(tag));
        std::ostringstream curves;
        seq2seq::write_curves_csv(curves, plain.result.curves);
        out.reports[tag + "_curves.csv"] = curves.str();
        const EvalReport ev = evaluate(*plain.model, ds, test_idx);
        out.reports[tag + "_eval.csv"] = to_csv([&](std::ostream &os) { write_eval_csv(os, ds, ev); });
        TrainedModel withaug = train_extractor(cfg, kind, aug, test, progress(tag + "-aug"));
        out.placement[kind] = placement_sweep(*plain.model, withaug.model.get(), ds, places);
        std::cerr << "  " << tag << " done, " << fmt("%.0f", sw.seconds()) << " s\n";
        return std::make_pair(std::move(plain), ev.mean_oer);
    };

    auto [rnn, rnn_oer] = run_kind(ModelKind::RnnCtc, rcfg, "rnn");
    out.rnn_oer = rnn_oer;
    out.noise = noise_sweep(*rnn.model, ds, test_idx, rcfg.snr_levels(), eval_noise_seed(rcfg));
    out.reports["noise.csv"] = to_csv([&](std::ostream &os) { write_noise_csv(os, out.noise); });

    auto [tf, tf_oer] = run_kind(ModelKind::Transformer, tcfg, "transformer");
    out.tf_oer = tf_oer;
    out.reports["placement.csv"] = to_csv([&](std::ostream &os) { write_placement_csv(os, out.placement); });

    const auto locs = localize_rows(*tf.model, ds, test_idx, tcfg.sensor().sim);
    out.loc = summarize(locs);
    out.reports["localization.csv"] =
        to_csv([&](std::ostream &os) { write_localization_csv(os, ds, test_idx, locs); });

    for (const auto &[name, text] : out.reports)
        write_text_file((fs::path(dir) / "reports" / name).string(), text);
    std::cerr << "  run finished, " << fmt("%.0f", sw.seconds()) << " s\n";
    return out;
}

Verdict end_to_end(const RunOutcome &r) {
    return {r.rnn_oer <= kRnnOerMax && r.tf_oer <= kTfOerMax,
            "test OER rnn-ctc " + fmt("%.4f", r.rnn_oer) + " (max " + fmt("%.2f", kRnnOerMax) + "), transformer " +
                fmt("%.4f", r.tf_oer) + " (max " + fmt("%.2f", kTfOerMax) + ")"};
}

Verdict noise_trend(const RunOutcome &r) {
    bool monotone = true;
    std::string detail;
    for (std::size_t i = 0; i < r.noise.size(); ++i) {
        if (i > 0)
            monotone = monotone && r.noise[i].oer >= r.noise[i - 1].oer;
        detail += (std::isinf(r.noise[i].snr_db) ? std::string("clean") : fmt("%.0f dB", r.noise[i].snr_db)) + " " +
                  fmt("%.4f", r.noise[i].oer) + ", ";
    }
    const double clean = r.noise.front().oer, worst = r.noise.back().oer;
    const bool big = worst >= kNoiseRatio * clean || worst >= kNoiseFloor;
    return {monotone && big, detail + (monotone ? "non-decreasing" : "NOT non-decreasing")};
}

Verdict placement_trend(const RunOutcome &r) {
    bool ok = true;
    std::string detail;
    for (const auto &[kind, rows] : r.placement) {
        const double orig = rows.front().oer_without;
        detail += std::string(kind == ModelKind::RnnCtc ? "rnn" : "tf") + " original " + fmt("%.3f", orig) + " (" +
                  std::to_string(rows.back().traces) + " traces per placement)";
        for (std::size_t i = 1; i < rows.size(); ++i) {
            // Every placement must degrade, and retraining must lower each
            // degraded OER.
            const bool degraded = rows[i].oer_without > orig;
            ok = ok && degraded && *rows[i].oer_with < rows[i].oer_without;
            detail += std::string(", ") + std::string(to_string(rows[i].placement)) + " " +
                      fmt("%.3f", rows[i].oer_without) + "->" + fmt("%.3f", *rows[i].oer_with);
        }
        detail += "; ";
    }
    return {ok, detail};
}

Verdict localization(const RunOutcome &r) {
    return {r.loc.mean_hit_rate >= kHitRateMin && r.loc.first_early_fraction >= kEarlyShareMin,
            std::to_string(r.loc.traces) + " traces, mean hit_rate " + fmt("%.3f", r.loc.mean_hit_rate) +
                ", first layer in earliest 20%: " + fmt("%.3f", r.loc.first_early_fraction) + " of traces"};
}

Verdict determinism(const RunOutcome &a, const RunOutcome &b) {
    std::vector<std::string> diff;
    for (const auto &[name, text] : a.reports) {
        const auto it = b.reports.find(name);
        if (it == b.reports.end() || it->second != text)
            diff.push_back(name);
    }
    std::string detail = std::to_string(a.reports.size()) + " reports compared";
    for (const auto &d : diff)
        detail += ", differs: " + d;
    return {diff.empty() && a.reports.size() == b.reports.size(), detail};
}

} // namespace

int main(int argc, char **argv) {
    const std::string work = argc > 1 ? argv[1] : (fs::temp_directory_path() / "mercury-acceptance").string();
    int failures = 0;
    auto report = [&](int id, const std::string &name, const Verdict &v) {
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << v.detail
                  << std::endl;
        failures += !v.pass;
    };
    auto guarded = [&](int id, const std::string &name, const std::function<Verdict()> &f) {
        try {
            report(id, name, f());
        } catch (const std::exception &e) {
            report(id, name, {false, std::string("exception: ") + e.what()});
        }
    };

    guarded(1, "ctc oracle", ctc_oracle);
    guarded(2, "decoder oracles", decoder_oracle);
    guarded(3, "edit distance", edit_distance_oracle);
    guarded(4, "gradient suite", gradient_suite);
    guarded(5, "sensor physics", sensor_physics);
    guarded(6, "preprocessing", preprocessing);

    try {
        std::cerr << "reproduction run 1\n";
        const RunOutcome a = reproduce((fs::path(work) / "run1").string());
        report(7, "end-to-end OER", end_to_end(a));
        report(8, "noise trend", noise_trend(a));
        report(9, "placement trend", placement_trend(a));
        report(10, "localization", localization(a));
        std::cerr << "reproduction run 2\n";
        const RunOutcome b = reproduce((fs::path(work) / "run2").string());
        report(11, "determinism", determinism(a, b));
    } catch (const std::exception &e) {
        for (int id = 7; id <= 11; ++id)
            report(id, "reproduction", {false, std::string("exception: ") + e.what()});
    }

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
