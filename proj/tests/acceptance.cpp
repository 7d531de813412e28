// Acceptance gate: one pass/fail line per criterion. Exits nonzero when any
// criterion fails. Criteria 7-9 train reduced-size models on synthetic data
// with a closed-form morphology-to-BP oracle; criterion 6 separately pins the
// full published dimensions.
#include "ppgbp/eval.hpp"
#include "ppgbp/io.hpp"
#include "ppgbp/pipeline.hpp"
#include "ppgbp/synth.hpp"
#include "ppgbp/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ppgbp;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s - %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Filter oracle: measured sine gain vs analytic forward-backward magnitude
// ---------------------------------------------------------------------------
void criterion_1() {
    const auto t0 = Clock::now();
    const double fs = 60.0;
    const FilterSpec spec; // zero-phase 0.7-16 Hz
    bool pass = true;
    std::string msg;
    for (double f : {0.1, 1.5, 25.0}) {
        const double dur = 240.0;
        TimeSeries x{std::vector<double>(static_cast<std::size_t>(dur * fs)), fs};
        for (std::size_t i = 0; i < x.samples.size(); ++i)
            x.samples[i] = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
        const auto y = bandpass_filter(x, spec);
        // amplitude by projection over the middle 120 s (integer periods at
        // 0.1 / 1.5 / 25 Hz), edges excluded
        const std::size_t lo = static_cast<std::size_t>(60.0 * fs);
        const std::size_t n = static_cast<std::size_t>(120.0 * fs);
        double cs = 0.0, sn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ph = 2.0 * std::numbers::pi * f * static_cast<double>(lo + i) / fs;
            cs += y.samples[lo + i] * std::cos(ph);
            sn += y.samples[lo + i] * std::sin(ph);
        }
        const double measured = 2.0 * std::sqrt(cs * cs + sn * sn) / static_cast<double>(n);
        const double g1 = ppgbp::detail::butter_bandpass_gain(spec, fs, f);
        const double expected = g1 * g1; // forward-backward squares the magnitude
        const double rel = std::abs(measured - expected) / expected;
        msg += fmt("%g Hz rel err %.2e; ", f, rel);
        if (rel > 0.02) pass = false;
    }
    const double dt = seconds_since(t0);
    if (dt >= 1.0) pass = false;
    report(1, pass, msg + fmt("runtime %.2f s (< 1 s)", dt));
}

// ---------------------------------------------------------------------------
// 2. Peak/segmentation oracle on zero-noise 120 s NSR
// ---------------------------------------------------------------------------
void criterion_2() {
    const std::uint64_t seed = 21;
    RhythmPattern pattern; // NSR, RR ~ N(0.85, 0.02)
    MorphParams m;
    const auto session = synth_session(pattern, m, 120.0, {0.0, 0.0}, seed);

    // regenerate the RR sequence to recover the generated beat boundaries
    Rng rng(seed);
    const auto rrs = rr_sequence(pattern, 120.0, rng);

    const auto filtered = minmax_normalize(bandpass_filter(session.signal, {}));
    const auto peaks = detect_peaks(filtered, {});

    const long diff = static_cast<long>(peaks.size()) - static_cast<long>(rrs.size());
    bool pass = std::labs(diff) <= 1;

    // one peak per beat: count peaks inside each generated beat span
    std::vector<std::size_t> bounds{0};
    for (double rr : rrs)
        bounds.push_back(bounds.back() + static_cast<std::size_t>(rr * session.signal.fs));
    std::size_t single = 0, multi = 0, pk = 0;
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        std::size_t count = 0;
        while (pk < peaks.size() && peaks[pk] < bounds[b + 1]) {
            if (peaks[pk] >= bounds[b]) ++count;
            ++pk;
        }
        if (count == 1) ++single;
        if (count > 1) ++multi;
    }
    if (multi != 0) pass = false;
    if (single + 1 < rrs.size()) pass = false;
    report(2, pass,
           fmt("beats %zu, peaks %zu (diff %ld), beats with exactly one peak %zu, "
               "beats with >1 peak %zu",
               rrs.size(), peaks.size(), diff, single, multi));
}

// ---------------------------------------------------------------------------
// 3. Screening thresholds and reasons (50 peaks / 0.8 SQI / 5-beat windows)
// ---------------------------------------------------------------------------
void criterion_3() {
    bool pass = true;
    std::string detail;

    // 49 identical spikes, 40 samples apart
    {
        TimeSeries x{std::vector<double>(49 * 40 + 40, 0.0), 60.0};
        for (std::size_t k = 0; k < 49; ++k) x.samples[20 + k * 40] = 1.0;
        const auto r = screen_session(x);
        const bool ok =
            r.status == ScreenStatus::ExcludedTooFewPeaks && r.peak_count == 49;
        detail += fmt("49-peak: %s (peaks %zu); ", ok ? "TooFewPeaks" : "WRONG", r.peak_count);
        pass = pass && ok;
    }

    // >= 50 spike peaks amid uniform filler: every beat decorrelates from the
    // template, so no 5-beat window clears mean SQI 0.8
    {
        Rng rng(3);
        TimeSeries x{std::vector<double>(55 * 40 + 40), 60.0};
        for (auto& v : x.samples) v = rng.uniform(0.0, 0.65);
        for (std::size_t k = 0; k < 55; ++k) x.samples[20 + k * 40] = 1.0;
        const auto r = screen_session(x);
        const bool ok = r.status == ScreenStatus::ExcludedLowSqi && r.peak_count >= 50;
        detail += fmt("low-SQI: %s (peaks %zu); ", ok ? "LowSqi" : "WRONG", r.peak_count);
        pass = pass && ok;
    }

    // clean synthetic NSR session is accepted
    {
        const auto session = synth_session({}, {}, 90.0, {0.005, 0.02}, 31);
        const auto filtered = minmax_normalize(bandpass_filter(session.signal, {}));
        const auto r = screen_session(filtered);
        const bool ok = r.status == ScreenStatus::Accepted;
        detail += fmt("clean: %s (peaks %zu, best SQI %.3f)", ok ? "Accepted" : "WRONG",
                      r.peak_count, r.best_window_sqi ? *r.best_window_sqi : -1.0);
        pass = pass && ok;
    }
    report(3, pass, detail);
}

// ---------------------------------------------------------------------------
// 4. SQI properties
// ---------------------------------------------------------------------------
void criterion_4() {
    Beat beat;
    beat.samples = synth_beat({}, 0.85, 60.0);
    const auto tpl = compute_template({beat});

    const double identical = beat_sqi(beat, tpl);

    Beat inverted = beat;
    for (auto& v : inverted.samples) v = 1.0 - v;
    const double inv = beat_sqi(inverted, tpl);

    Beat affine = beat;
    for (auto& v : affine.samples) v = 2.5 * v + 3.25;
    const double aff = std::abs(beat_sqi(affine, tpl) - identical);

    const bool pass = std::abs(identical - 1.0) < 1e-12 && inv == 0.0 && aff <= 1e-9;
    report(4, pass,
           fmt("identical %.15f, inverted %.3f, affine delta %.2e (<= 1e-9)", identical, inv,
               aff));
}

// ---------------------------------------------------------------------------
// 5. Gradient suite on a reduced hybrid model (conv, BN train mode,
//    attention, layer-norm, MLP)
// ---------------------------------------------------------------------------
void criterion_5() {
    const auto t0 = Clock::now();
    const auto cfg = ModelConfig::reduced(ModelVariant::Hybrid, HeadKind::Regression2);
    Model model(cfg, 51);
    model.set_output_affine({120.0, 75.0}, {10.0, 8.0});

    Rng rng(52);
    std::vector<Sample> batch(2);
    for (auto& s : batch) {
        s.window.resize(cfg.input_channels * cfg.input_len);
        for (auto& v : s.window) v = rng.uniform();
        s.features = encode_profile(random_profile(rng.fork(7)));
        s.sbp = rng.uniform(95.0, 145.0);
        s.dbp = rng.uniform(65.0, 85.0);
    }
    TrainConfig tc;
    tc.seed = 53;
    const double err = grad_check(model, batch, tc, 1e-5, 0.005);
    const double dt = seconds_since(t0);
    const bool pass = err < 1e-4 && dt < 120.0;
    report(5, pass, fmt("max mixed abs/rel error %.3e (< 1e-4), runtime %.1f s (< 120 s)", err,
                        dt));
}

// ---------------------------------------------------------------------------
// 6. Published dimensions at full size
// ---------------------------------------------------------------------------
void criterion_6() {
    ModelConfig cfg; // full-size defaults
    bool pass = cfg.input_channels == 5 && cfg.input_len == 512 &&
                cfg.conv_channels == std::vector<std::size_t>{16, 32, 64, 128, 128} &&
                cfg.token_count() == 32 && cfg.ppg_embed_dim == 128 && cfg.vit_heads == 8 &&
                cfg.vit_ff_dim == 512 && cfg.vit_depth == 2 && kFeatureCount == 37 &&
                cfg.baseline_hidden == std::vector<std::size_t>{64} && cfg.baseline_out == 64 &&
                cfg.fusion_dim == 192;

    Model model(cfg, 61);
    Rng rng(62);
    std::vector<double> window(5 * 512);
    for (auto& v : window) v = rng.uniform();
    std::vector<double> feats(kFeatureCount);
    for (auto& v : feats) v = rng.normal();

    const auto fmap = model.cnn_branch(window, 1, false, false);
    pass = pass && fmap.size() == 128 * 32;
    const auto embed = model.vit_encoder(fmap, 1);
    pass = pass && embed.size() == 128;
    const auto base = model.baseline_branch(feats, 1);
    pass = pass && base.size() == 64;
    const auto out = model.forward(window, feats, 1, false, false);
    pass = pass && out.size() == 2;

    report(6, pass,
           fmt("5x512 -> CNN map %zu (=128x32), embed %zu, baseline %zu, fusion %zu, out %zu",
               fmap.size(), embed.size(), base.size(), cfg.fusion_dim, out.size()));
}

// ---------------------------------------------------------------------------
// Synthetic dataset shared by criteria 7-9
// ---------------------------------------------------------------------------
struct Dataset {
    std::vector<Sample> samples;
    std::vector<std::string> sessions; // accepted sessions, generation order
    std::map<std::string, double> true_sbp;
    std::map<std::string, Rhythm> rhythm;
    std::size_t generated = 0;
};

Dataset make_dataset(std::size_t n, std::uint64_t seed, const std::vector<Rhythm>& rhythms,
                     double duration_s, std::size_t max_windows) {
    Dataset d;
    d.generated = n;
    Rng seeder(seed);
    PipelineOptions opt;
    opt.max_windows = max_windows;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t morph_seed = seeder.next_u64();
        const std::uint64_t session_seed = seeder.next_u64();
        Rng mrng(morph_seed);
        MorphParams m;
        m.a1 = mrng.uniform(0.7, 1.0);
        m.a2 = mrng.uniform(0.3, 0.9);
        m.mu1 = mrng.uniform(0.10, 0.25);

        RhythmPattern pattern;
        pattern.kind = rhythms[i % rhythms.size()];
        auto session = synth_session(pattern, m, duration_s, {0.01, 0.05}, session_seed);
        char id[16];
        std::snprintf(id, sizeof id, "s%04zu", i + 1);

        const auto res = run_session_pipeline(id, id, session.signal, opt);
        if (res.windows.empty()) continue;
        d.sessions.push_back(id);
        d.true_sbp[id] = session.true_sbp;
        d.rhythm[id] = session.rhythm;
        const auto feats = encode_profile(session.profile);
        for (const auto& w : res.windows) {
            Sample s;
            s.session_id = id;
            s.subject_id = id;
            s.window.reserve(kWindowBeats * kPaddedBeatLen);
            for (const auto& b : w.beats) s.window.insert(s.window.end(), b.begin(), b.end());
            s.features = feats;
            s.sbp = session.true_sbp;
            s.dbp = session.true_dbp;
            d.samples.push_back(std::move(s));
        }
    }
    return d;
}

std::map<std::string, std::vector<Sample>> group_by_session(const Dataset& d,
                                                            const std::set<std::string>& keep) {
    std::map<std::string, std::vector<Sample>> g;
    for (const auto& s : d.samples)
        if (keep.empty() || keep.count(s.session_id)) g[s.session_id].push_back(s);
    return g;
}

struct RegressionEval {
    RegressionMetrics metrics;
    std::vector<double> pred, truth;
};

RegressionEval eval_sessions(Model& model, const Dataset& d, const std::set<std::string>& keep) {
    RegressionEval e;
    for (auto& [sid, group] : group_by_session(d, keep)) {
        const auto p = predict_session_regression(model, group);
        e.pred.push_back(p.sbp);
        e.truth.push_back(d.true_sbp.at(sid));
    }
    e.metrics = regression_metrics(e.pred, e.truth);
    return e;
}

// Criteria 7 and 9 share the hybrid regression model; train once.
struct TrainedRegression {
    Dataset data;
    Model hybrid;
    std::set<std::string> val;
    std::vector<std::string> train_subjects;
};

TrainedRegression* g_reg = nullptr;

void criterion_7() {
    const auto t0 = Clock::now();
    static TrainedRegression tr{
        make_dataset(300, 71,
                     {Rhythm::NSR, Rhythm::AF, Rhythm::FrequentEctopy, Rhythm::Paced}, 60.0, 3),
        Model(ModelConfig::reduced(ModelVariant::Hybrid, HeadKind::Regression2), 72),
        {},
        {}};
    g_reg = &tr;
    const Dataset& data = tr.data;

    TrainConfig tc;
    tc.lr = 3e-3;
    tc.batch_size = 32;
    tc.epochs = 8;
    tc.seed = 73;

    const auto r_hy = train(tr.hybrid, data.samples, tc);
    tr.val.insert(r_hy.val_subjects.begin(), r_hy.val_subjects.end());
    tr.train_subjects = r_hy.train_subjects;
    const auto e_hy = eval_sessions(tr.hybrid, data, tr.val);

    Model ppg(ModelConfig::reduced(ModelVariant::Ppg, HeadKind::Regression2), 74);
    const auto r_pp = train(ppg, data.samples, tc);
    const std::set<std::string> val_pp(r_pp.val_subjects.begin(), r_pp.val_subjects.end());
    const auto e_pp = eval_sessions(ppg, data, val_pp);

    Model base(ModelConfig::reduced(ModelVariant::Baseline, HeadKind::Regression2), 75);
    TrainConfig tcb = tc;
    tcb.epochs = 15;
    // strong decay gives the baseline its best validation loss: with
    // uninformative profiles the optimal regularized model is bias-only
    tcb.weight_decay = 10.0;
    const auto r_ba = train(base, data.samples, tcb);
    const std::set<std::string> val_ba(r_ba.val_subjects.begin(), r_ba.val_subjects.end());
    const auto e_ba = eval_sessions(base, data, val_ba);

    // predict-the-mean reference over the baseline's own split
    double mean_sbp = 0.0;
    std::size_t nt = 0;
    for (const auto& sid : r_ba.train_subjects) {
        mean_sbp += data.true_sbp.at(sid);
        ++nt;
    }
    mean_sbp /= static_cast<double>(nt);
    double mae_mean = 0.0;
    for (const auto& sid : val_ba) mae_mean += std::abs(mean_sbp - data.true_sbp.at(sid));
    mae_mean /= static_cast<double>(val_ba.size());

    const double dt = seconds_since(t0);
    const bool ordering = e_ba.metrics.mae >= 0.9 * mae_mean && e_ba.metrics.mae <= 1.1 * mae_mean;
    const bool pass = e_hy.metrics.pearson_r >= 0.8 && e_hy.metrics.mae <= 5.0 &&
                      e_pp.metrics.pearson_r >= 0.8 && e_pp.metrics.mae <= 5.0 && ordering &&
                      dt < 600.0;
    report(7, pass,
           fmt("hybrid r %.3f mae %.2f; ppg r %.3f mae %.2f; baseline mae %.2f vs "
               "predict-mean %.2f (+-10%%); sessions %zu/%zu; runtime %.0f s (< 600 s)",
               e_hy.metrics.pearson_r, e_hy.metrics.mae, e_pp.metrics.pearson_r,
               e_pp.metrics.mae, e_ba.metrics.mae, mae_mean, data.sessions.size(),
               data.generated, dt));
}

void criterion_8() {
    if (!g_reg) {
        report(8, false, "skipped: criterion 7 dataset unavailable");
        return;
    }
    const Dataset& data = g_reg->data;
    Model model(ModelConfig::reduced(ModelVariant::Hybrid, HeadKind::BinaryLogit), 81);
    TrainConfig tc;
    tc.lr = 3e-3;
    tc.batch_size = 32;
    tc.epochs = 8;
    tc.seed = 82;
    tc.class_threshold = 130.0;
    const auto r = train(model, data.samples, tc);

    std::vector<bool> pred, truth;
    const std::set<std::string> val(r.val_subjects.begin(), r.val_subjects.end());
    for (auto& [sid, group] : group_by_session(data, val)) {
        pred.push_back(predict_session_class(model, group).positive);
        truth.push_back(data.true_sbp.at(sid) >= tc.class_threshold);
    }
    const auto m = classification_metrics(pred, truth);
    // the Suppl. A1 schema: accuracy / PPV / NPV / sensitivity / specificity
    std::string schema = fmt(
        "acc %.3f ppv %s npv %s sens %s spec %s", m.accuracy,
        m.ppv ? fmt("%.3f", *m.ppv).c_str() : "n/a",
        m.npv ? fmt("%.3f", *m.npv).c_str() : "n/a",
        m.sensitivity ? fmt("%.3f", *m.sensitivity).c_str() : "n/a",
        m.specificity ? fmt("%.3f", *m.specificity).c_str() : "n/a");
    const bool pass = m.accuracy >= 0.9;
    report(8, pass, fmt("held-out n %zu, %s (accuracy >= 0.9)", m.n, schema.c_str()));
}

void criterion_9() {
    if (!g_reg) {
        report(9, false, "skipped: criterion 7 model unavailable");
        return;
    }
    const auto data = make_dataset(
        400, 91, {Rhythm::NSR, Rhythm::AF, Rhythm::FrequentEctopy, Rhythm::Paced}, 60.0, 3);

    std::vector<SessionResult> results;
    for (auto& [sid, group] : group_by_session(data, {})) {
        SessionResult r;
        r.session_id = sid;
        r.pred = predict_session_regression(g_reg->hybrid, group).sbp;
        r.truth = data.true_sbp.at(sid);
        r.rhythm = data.rhythm.at(sid);
        results.push_back(std::move(r));
    }
    const auto rep = stratified_report(results);

    bool pass = rep.strata.size() == 4;
    double mae_nsr = -1.0, mae_af = -1.0;
    std::string detail;
    for (const auto& s : rep.strata) {
        if (s.rhythm == Rhythm::NSR) mae_nsr = s.metrics.mae;
        if (s.rhythm == Rhythm::AF) mae_af = s.metrics.mae;
        if (s.rhythm != Rhythm::NSR && !s.vs_nsr) pass = false;
        detail += fmt("%s n=%zu mae %.2f%s; ", rhythm_to_string(s.rhythm), s.n,
                      s.sufficient ? s.metrics.mae : -1.0,
                      s.vs_nsr ? fmt(" p=%.3f", s.vs_nsr->p_two_sided).c_str() : "");
    }
    if (mae_nsr < 0.0 || mae_af < 0.0) pass = false;
    const double gap = std::abs(mae_af - mae_nsr);
    if (gap > 2.0) pass = false;
    report(9, pass, detail + fmt("|MAE(AF)-MAE(NSR)| = %.2f (<= 2)", gap));
}

// ---------------------------------------------------------------------------
// 10. Statistics oracles
// ---------------------------------------------------------------------------
void criterion_10() {
    bool pass = true;
    std::string detail;

    const auto mw = mann_whitney_u({1.0, 2.0}, {3.0, 4.0});
    const double mw_err = std::abs(mw.p_two_sided - 1.0 / 3.0);
    if (!mw.exact || mw_err > 1e-12) pass = false;
    detail += fmt("MW p %.9f (1/3, err %.1e); ", mw.p_two_sided, mw_err);

    // 2 * P(Bin(12, 0.5) <= 2) = 2 * (1 + 12 + 66) / 4096
    const auto mc = mcnemar(10, 2);
    const double mc_expected = 2.0 * 79.0 / 4096.0;
    const double mc_err = std::abs(mc.p - mc_expected);
    if (!mc.exact || mc_err > 1e-6) pass = false;
    detail += fmt("McNemar p %.9f (%.9f, err %.1e); ", mc.p, mc_expected, mc_err);

    // Pearson / MAE / Bland-Altman vs brute force on random vectors
    Rng rng(101);
    std::vector<double> p(57), t(57);
    for (std::size_t i = 0; i < p.size(); ++i) {
        t[i] = rng.uniform(90.0, 150.0);
        p[i] = t[i] + rng.normal(0.0, 6.0);
    }
    const auto m = regression_metrics(p, t);
    const auto ba = bland_altman(p, t);
    const std::size_t n = p.size();
    long double sa = 0.0L, sd = 0.0L, mp = 0.0L, mt = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        sa += std::abs((long double)p[i] - t[i]);
        sd += (long double)p[i] - t[i];
        mp += p[i];
        mt += t[i];
    }
    const long double mae_bf = sa / n, bias_bf = sd / n;
    mp /= n;
    mt /= n;
    long double spp = 0.0L, stt = 0.0L, spt = 0.0L, ssd = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        spp += (p[i] - mp) * (p[i] - mp);
        stt += (t[i] - mt) * (t[i] - mt);
        spt += (p[i] - mp) * (t[i] - mt);
        const long double d = (long double)p[i] - t[i] - bias_bf;
        ssd += d * d;
    }
    const long double r_bf = spt / std::sqrt(spp * stt);
    const long double loa_hi_bf = bias_bf + 1.96L * std::sqrt(ssd / (n - 1));
    const double worst = std::max(
        {std::abs(m.mae - (double)mae_bf), std::abs(m.pearson_r - (double)r_bf),
         std::abs(ba.bias - (double)bias_bf), std::abs(ba.loa_high - (double)loa_hi_bf)});
    if (worst > 1e-9) pass = false;
    detail += fmt("metrics vs brute force worst delta %.1e (<= 1e-9)", worst);
    report(10, pass, detail);
}

// ---------------------------------------------------------------------------
// 11. Byte-identical rerun of the full CLI pipeline
// ---------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bool run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
}

void criterion_11() {
    const char* cli = std::getenv("PPGBP_CLI");
    if (!cli) {
        report(11, false, "PPGBP_CLI not set");
        return;
    }
    const fs::path root = fs::temp_directory_path() / "ppgbp_acceptance_rerun";
    fs::remove_all(root);
    bool ok = true;
    for (int run = 1; run <= 2 && ok; ++run) {
        const fs::path d = root / ("run" + std::to_string(run));
        fs::create_directories(d);
        const std::string data = (d / "data").string();
        ok = ok &&
             run_cli(cli, "synth --out " + data +
                              " --set synth.sessions=12 --set synth.duration_s=60"
                              " --set seed=11");
        ok = ok && run_cli(cli, "pipeline --in " + data + "/signals --out " +
                                    (d / "w.jsonl").string() + " --screen-log " +
                                    (d / "screen.jsonl").string() + " --profiles " + data +
                                    "/profiles.jsonl --jobs 2");
        ok = ok && run_cli(cli, "train --windows " + (d / "w.jsonl").string() + " --labels " +
                                    data + "/labels.jsonl --profiles " + data +
                                    "/profiles.jsonl --out " + (d / "ckpt.json").string() +
                                    " --log " + (d / "log.csv").string() +
                                    " --set model.variant=baseline --set model.reduced=true"
                                    " --set train.epochs=2 --set seed=11");
        ok = ok && run_cli(cli, "predict --checkpoint " + (d / "ckpt.json").string() +
                                    " --windows " + (d / "w.jsonl").string() + " --profiles " +
                                    data + "/profiles.jsonl --out " + (d / "preds.csv").string());
        ok = ok && run_cli(cli, "eval --predictions " + (d / "preds.csv").string() +
                                    " --labels " + data + "/labels.jsonl --out-json " +
                                    (d / "report.json").string());
    }
    if (!ok) {
        report(11, false, "a CLI stage failed");
        return;
    }
    std::string mismatch;
    for (const char* f :
         {"w.jsonl", "screen.jsonl", "ckpt.json", "log.csv", "preds.csv", "report.json"}) {
        const auto a = slurp(root / "run1" / f);
        const auto b = slurp(root / "run2" / f);
        if (a.empty() || a != b) mismatch += std::string(f) + " ";
    }
    report(11, mismatch.empty(),
           mismatch.empty() ? "all pipeline outputs byte-identical across reruns"
                            : "differs: " + mismatch);
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    std::printf("%d of 11 criteria passed\n", 11 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
