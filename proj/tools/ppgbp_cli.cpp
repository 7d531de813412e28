// Batch front end: synthesize sessions, extract rPPG from frames, run the
// screening pipeline, train/predict with the model family, and evaluate.
#include "ppgbp/eval.hpp"
#include "ppgbp/frame_io.hpp"
#include "ppgbp/io.hpp"
#include "ppgbp/pipeline.hpp"
#include "ppgbp/report_io.hpp"
#include "ppgbp/synth.hpp"
#include "ppgbp/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ppgbp;

namespace {

// Thrown for malformed config files / --set overrides (usage errors, exit 1).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// RunConfig: one JSON document covering every module's parameters, defaults
// matching the published constants. Unknown keys are rejected.
// ---------------------------------------------------------------------------

struct SynthConfig {
    std::size_t sessions = 40;
    double duration_s = 60.0;
    double fs = 60.0;
    double white_sd = 0.01;
    double wander_amp = 0.05;
    std::vector<std::string> rhythms{"NSR"};
};

struct ModelChoice {
    std::string variant = "hybrid";
    std::string head = "regression2";
    bool reduced = false;

    ModelConfig build() const {
        ModelConfig c = reduced ? ModelConfig::reduced(variant_from_string(variant),
                                                       head_from_string(head))
                                : ModelConfig{};
        c.variant = variant_from_string(variant);
        c.head = head_from_string(head);
        return c;
    }
};

struct RunConfig {
    std::uint64_t seed = 1;
    FilterSpec filter{};
    PeakSpec peaks{};
    PipelineOptions pipeline{};
    ModelChoice model{};
    TrainConfig train{};
    SynthConfig synth{};
    FeatureNorm norm{};
};

template <typename T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw UsageError("config: unknown key '" + where + it.key() + "'");
    }
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    reject_unknown(j, {"seed", "filter", "peaks", "pipeline", "model", "train", "synth", "norm"},
                   "");
    take(j, "seed", c.seed);
    if (j.contains("filter")) {
        const auto& f = j.at("filter");
        reject_unknown(f, {"order", "f_lo", "f_hi", "zero_phase"}, "filter.");
        take(f, "order", c.filter.order);
        take(f, "f_lo", c.filter.f_lo);
        take(f, "f_hi", c.filter.f_hi);
        take(f, "zero_phase", c.filter.zero_phase);
    }
    if (j.contains("peaks")) {
        const auto& p = j.at("peaks");
        reject_unknown(p, {"min_height", "min_distance"}, "peaks.");
        take(p, "min_height", c.peaks.min_height);
        take(p, "min_distance", c.peaks.min_distance);
    }
    if (j.contains("pipeline")) {
        const auto& p = j.at("pipeline");
        reject_unknown(p, {"window_beats", "max_windows", "sqi_threshold", "min_peaks"},
                       "pipeline.");
        take(p, "window_beats", c.pipeline.window_beats);
        take(p, "max_windows", c.pipeline.max_windows);
        take(p, "sqi_threshold", c.pipeline.sqi_threshold);
        take(p, "min_peaks", c.pipeline.min_peak_count);
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        reject_unknown(m, {"variant", "head", "reduced"}, "model.");
        take(m, "variant", c.model.variant);
        take(m, "head", c.model.head);
        take(m, "reduced", c.model.reduced);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        reject_unknown(t,
                       {"lr", "weight_decay", "batch_size", "epochs", "train_fraction",
                        "class_threshold", "seed"},
                       "train.");
        take(t, "lr", c.train.lr);
        take(t, "weight_decay", c.train.weight_decay);
        take(t, "batch_size", c.train.batch_size);
        take(t, "epochs", c.train.epochs);
        take(t, "train_fraction", c.train.train_fraction);
        take(t, "class_threshold", c.train.class_threshold);
        take(t, "seed", c.train.seed);
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        reject_unknown(s, {"sessions", "duration_s", "fs", "white_sd", "wander_amp", "rhythms"},
                       "synth.");
        take(s, "sessions", c.synth.sessions);
        take(s, "duration_s", c.synth.duration_s);
        take(s, "fs", c.synth.fs);
        take(s, "white_sd", c.synth.white_sd);
        take(s, "wander_amp", c.synth.wander_amp);
        take(s, "rhythms", c.synth.rhythms);
    }
    if (j.contains("norm")) {
        const auto& n = j.at("norm");
        reject_unknown(n, {"age_mean", "age_sd", "bmi_mean", "bmi_sd"}, "norm.");
        take(n, "age_mean", c.norm.age_mean);
        take(n, "age_sd", c.norm.age_sd);
        take(n, "bmi_mean", c.norm.bmi_mean);
        take(n, "bmi_sd", c.norm.bmi_sd);
    }
    return c;
}

// Apply `--set a.b=value` overrides onto the raw JSON document.
void apply_override(json& doc, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw UsageError("--set expects key=value, got '" + kv + "'");
    const std::string path = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw; // unquoted strings pass through verbatim
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw UsageError("--set: empty key segment in '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

RunConfig load_config(const std::string& config_path, const std::vector<std::string>& sets) {
    json doc = json::object();
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) throw UsageError("cannot open config file: " + config_path);
        try {
            doc = json::parse(is);
        } catch (const json::exception& e) {
            throw UsageError(std::string("config parse error: ") + e.what());
        }
    }
    for (const auto& kv : sets) apply_override(doc, kv);
    try {
        return config_from_json(doc);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

const char* screen_status_name(ScreenStatus s) {
    switch (s) {
        case ScreenStatus::Accepted: return "Accepted";
        case ScreenStatus::ExcludedTooFewPeaks: return "ExcludedTooFewPeaks";
        case ScreenStatus::ExcludedLowSqi: return "ExcludedLowSqi";
    }
    return "Accepted";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    return os;
}

std::map<std::string, SubjectProfile> profile_map(const std::string& path) {
    std::map<std::string, SubjectProfile> m;
    if (path.empty()) return m;
    for (const auto& r : read_profiles_jsonl(path, &std::cerr)) m[r.session_id] = r.profile;
    return m;
}

std::map<std::string, std::string> subject_map(const std::string& path) {
    std::map<std::string, std::string> m;
    if (path.empty()) return m;
    for (const auto& r : read_profiles_jsonl(path)) m[r.session_id] = r.subject_id;
    return m;
}

// Windows joined with labels/profiles into model inputs, grouped by session
// in first-appearance order.
struct JoinedData {
    std::vector<Sample> samples;
    std::vector<std::string> session_order;
    std::map<std::string, std::vector<std::size_t>> by_session;
};

JoinedData join_samples(const std::vector<WindowRecord>& windows,
                        const std::map<std::string, LabelRecord>& labels,
                        const std::map<std::string, SubjectProfile>& profiles,
                        const ModelConfig& mc, const FeatureNorm& norm, bool need_labels) {
    JoinedData out;
    for (const auto& w : windows) {
        Sample s;
        s.session_id = w.session_id;
        s.subject_id = w.subject_id;
        if (mc.variant != ModelVariant::Baseline) {
            s.window.reserve(mc.input_channels * mc.input_len);
            for (const auto& beat : w.beats)
                s.window.insert(s.window.end(), beat.begin(), beat.end());
        }
        if (mc.variant != ModelVariant::Ppg) {
            const auto it = profiles.find(w.session_id);
            if (it == profiles.end())
                throw ParseError("no profile for session " + w.session_id +
                                 " (required by variant '" +
                                 std::string(variant_to_string(mc.variant)) + "')");
            s.features = encode_profile(it->second, norm);
        }
        if (need_labels) {
            const auto it = labels.find(w.session_id);
            if (it == labels.end())
                throw ParseError("no label for session " + w.session_id);
            s.sbp = it->second.true_sbp;
            s.dbp = it->second.true_dbp;
        }
        if (out.by_session.find(w.session_id) == out.by_session.end())
            out.session_order.push_back(w.session_id);
        out.by_session[w.session_id].push_back(out.samples.size());
        out.samples.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig& cfg, const std::string& out_dir) {
    fs::create_directories(fs::path(out_dir) / "signals");
    std::vector<LabelRecord> labels;
    std::vector<ProfileRecord> profiles;

    Rng seeder(cfg.seed);
    for (std::size_t i = 0; i < cfg.synth.sessions; ++i) {
        const std::uint64_t morph_seed = seeder.next_u64();
        const std::uint64_t session_seed = seeder.next_u64();
        Rng mrng(morph_seed);
        MorphParams m;
        m.a1 = mrng.uniform(0.7, 1.0);
        m.a2 = mrng.uniform(0.3, 0.9);
        m.mu1 = mrng.uniform(0.10, 0.25);

        RhythmPattern pattern;
        pattern.kind =
            rhythm_from_string(cfg.synth.rhythms[i % cfg.synth.rhythms.size()]);
        NoiseSpec noise{cfg.synth.white_sd, cfg.synth.wander_amp};
        auto session =
            synth_session(pattern, m, cfg.synth.duration_s, noise, session_seed, cfg.synth.fs);

        char idbuf[16];
        std::snprintf(idbuf, sizeof idbuf, "s%04zu", i + 1);
        session.id = idbuf;

        write_signal_csv(session.signal,
                         (fs::path(out_dir) / "signals" / (session.id + ".csv")).string());
        labels.push_back({session.id, session.true_sbp, session.true_dbp, session.rhythm});
        profiles.push_back({session.id, session.id, session.profile});
    }
    {
        auto os = open_out((fs::path(out_dir) / "labels.jsonl").string());
        write_labels_jsonl(labels, os);
    }
    {
        auto os = open_out((fs::path(out_dir) / "profiles.jsonl").string());
        write_profiles_jsonl(profiles, os);
    }
    std::cout << "synth: wrote " << labels.size() << " sessions to " << out_dir << "\n";
    return 0;
}

int cmd_extract(const RunConfig& cfg, const std::string& frames_dir,
                const std::string& mask_path, const std::string& out_path) {
    (void)cfg;
    const auto manifest = read_frame_manifest((fs::path(frames_dir) / "manifest.json").string());
    const RoiMask mask = mask_path.empty() ? RoiMask::default_mask() : read_mask(mask_path);
    std::vector<Frame> frames;
    frames.reserve(manifest.frames.size());
    for (const auto& name : manifest.frames) {
        auto f = read_manifest_frame(frames_dir, manifest, name);
        if (f.width != kRoiSize || f.height != kRoiSize) f = downsample_frame(f);
        frames.push_back(std::move(f));
    }
    const auto signal = extract_rppg(frames, manifest.fs, mask);
    write_signal_csv(signal, out_path);
    std::cout << "extract: " << signal.size() << " samples at " << manifest.fs << " Hz\n";
    return 0;
}

int cmd_pipeline(const RunConfig& cfg, const std::string& in_dir, const std::string& out_path,
                 const std::string& screen_log_path, const std::string& profiles_path,
                 bool no_sqi_screen, unsigned jobs) {
    std::vector<std::string> stems;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(in_dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) stems.push_back(p.stem().string());
    if (files.empty()) throw ParseError("pipeline: no .csv signals in " + in_dir);

    const auto subjects = subject_map(profiles_path);
    PipelineOptions opt = cfg.pipeline;
    opt.filter = cfg.filter;
    opt.peaks = cfg.peaks;
    opt.sqi_screen = !no_sqi_screen;

    // session-level parallelism; results land in session order regardless of
    // completion order
    std::vector<SessionPipelineResult> results(files.size());
    std::vector<std::string> errors(files.size());
    auto worker = [&](unsigned tid) {
        for (std::size_t i = tid; i < files.size(); i += jobs) {
            try {
                const auto sig = read_signal_csv(files[i].string());
                const auto it = subjects.find(stems[i]);
                const std::string subject = it == subjects.end() ? stems[i] : it->second;
                results[i] = run_session_pipeline(stems[i], subject, sig, opt);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (jobs <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned t = 0; t < jobs; ++t) threads.emplace_back(worker, t);
        for (auto& t : threads) t.join();
    }
    for (std::size_t i = 0; i < files.size(); ++i)
        if (!errors[i].empty())
            throw ParseError("session " + stems[i] + ": " + errors[i]);

    auto wos = open_out(out_path);
    std::ofstream los;
    if (!screen_log_path.empty()) los = open_out(screen_log_path);
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto& r = results[i];
        write_window_jsonl(r.windows, wos);
        accepted += r.screen.status == ScreenStatus::Accepted;
        if (los.is_open()) {
            json j;
            j["session"] = stems[i];
            j["status"] = screen_status_name(r.screen.status);
            j["peak_count"] = r.screen.peak_count;
            if (r.screen.best_window_sqi) j["best_window_sqi"] = *r.screen.best_window_sqi;
            else j["best_window_sqi"] = nullptr;
            j["windows"] = r.windows.size();
            los << j.dump() << "\n";
        }
    }
    std::cout << "pipeline: " << accepted << "/" << files.size() << " sessions accepted\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& windows_path,
              const std::string& labels_path, const std::string& profiles_path,
              const std::string& out_path, const std::string& log_path) {
    const auto windows = read_window_jsonl(windows_path);
    if (windows.empty()) throw ParseError("train: no windows in " + windows_path);
    std::map<std::string, LabelRecord> labels;
    for (const auto& l : read_labels_jsonl(labels_path)) labels[l.session_id] = l;

    const auto mc = cfg.model.build();
    const auto data =
        join_samples(windows, labels, profile_map(profiles_path), mc, cfg.norm, true);

    Model model(mc, cfg.seed);
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed ^ tc.seed;
    const auto result = train(model, data.samples, tc);

    save_checkpoint(model, cfg.norm, out_path);
    if (!log_path.empty()) {
        auto os = open_out(log_path);
        write_train_log_csv(result.history, os);
    }
    std::cout << "train: " << result.history.size() << " epochs, final train_loss="
              << result.history.back().train_loss
              << " val_loss=" << result.history.back().val_loss << "\n";
    return 0;
}

int cmd_predict(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& windows_path, const std::string& profiles_path,
                const std::string& out_path) {
    auto ckpt = load_checkpoint(checkpoint_path);
    const auto windows = read_window_jsonl(windows_path);
    if (windows.empty()) throw ParseError("predict: no windows in " + windows_path);
    const auto data = join_samples(windows, {}, profile_map(profiles_path),
                                   ckpt.model->config(), ckpt.norm, false);
    (void)cfg;

    std::vector<PredictionRecord> preds;
    for (const auto& sid : data.session_order) {
        std::vector<Sample> group;
        for (std::size_t idx : data.by_session.at(sid)) group.push_back(data.samples[idx]);
        PredictionRecord p;
        p.session_id = sid;
        if (ckpt.model->config().head == HeadKind::Regression2) {
            const auto r = predict_session_regression(*ckpt.model, group);
            p.sbp = r.sbp;
            p.dbp = r.dbp;
        } else {
            const auto c = predict_session_class(*ckpt.model, group);
            p.is_class = true;
            p.positive = c.positive;
            p.probability = c.probability;
        }
        preds.push_back(std::move(p));
    }
    auto os = open_out(out_path);
    write_predictions_csv(preds, os);
    std::cout << "predict: " << preds.size() << " sessions\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& predictions_path,
             const std::string& labels_path, const std::string& json_path,
             const std::string& table_path, const std::string& svg_path,
             const std::string& ba_path) {
    const auto preds = read_predictions_csv(predictions_path);
    if (preds.empty()) throw ParseError("eval: no predictions in " + predictions_path);
    std::map<std::string, LabelRecord> labels;
    for (const auto& l : read_labels_jsonl(labels_path)) labels[l.session_id] = l;

    json out;
    if (preds.front().is_class) {
        std::vector<bool> pc, tc;
        for (const auto& p : preds) {
            const auto it = labels.find(p.session_id);
            if (it == labels.end()) throw ParseError("eval: no label for " + p.session_id);
            pc.push_back(p.positive);
            tc.push_back(it->second.true_sbp >= cfg.train.class_threshold);
        }
        const auto m = classification_metrics(pc, tc);
        json cj;
        cj["n"] = m.n;
        cj["accuracy"] = m.accuracy;
        auto put = [&](const char* k, const std::optional<double>& v) {
            if (v) cj[k] = *v;
            else cj[k] = nullptr;
        };
        put("ppv", m.ppv);
        put("npv", m.npv);
        put("sensitivity", m.sensitivity);
        put("specificity", m.specificity);
        cj["confusion"] = {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
        cj["threshold_mmhg"] = cfg.train.class_threshold;
        out["classification"] = std::move(cj);
        if (!json_path.empty()) open_out(json_path) << out.dump(2) << "\n";
        if (!table_path.empty())
            open_out(table_path) << "Classification: n=" << m.n << " accuracy=" << m.accuracy
                                 << "\n";
        std::cout << "eval: classification accuracy " << m.accuracy << " (n=" << m.n << ")\n";
        return 0;
    }

    std::vector<SessionResult> results;
    std::vector<double> pvec, tvec;
    for (const auto& p : preds) {
        const auto it = labels.find(p.session_id);
        if (it == labels.end()) throw ParseError("eval: no label for " + p.session_id);
        SessionResult r;
        r.session_id = p.session_id;
        r.pred = p.sbp;
        r.truth = it->second.true_sbp;
        r.rhythm = it->second.rhythm;
        results.push_back(r);
        pvec.push_back(r.pred);
        tvec.push_back(r.truth);
    }
    const auto rep = stratified_report(results);
    if (!json_path.empty()) open_out(json_path) << report_to_json(rep).dump(2) << "\n";
    if (!table_path.empty()) open_out(table_path) << report_to_table(rep);
    if (!svg_path.empty()) open_out(svg_path) << report_to_svg(rep, pvec, tvec);
    if (!ba_path.empty()) {
        auto os = open_out(ba_path);
        write_bland_altman_csv(rep.ba, os);
    }
    std::cout << "eval: n=" << rep.overall.n << " r=" << rep.overall.pearson_r
              << " mae=" << rep.overall.mae << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Camera-based blood-pressure estimation pipeline"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::vector<std::string> sets;
    bool show_version = false;
    app.add_option("--config", config_path, "RunConfig JSON file");
    app.add_option("--set", sets, "Override a config key (dotted path, key=value)");
    app.add_flag("--version", show_version, "Print file-format compatibility versions");

    // synth
    auto* synth = app.add_subcommand("synth", "Emit a labeled synthetic dataset");
    std::string synth_out;
    synth->add_option("--out", synth_out, "Output directory")->required();

    // extract
    auto* extract = app.add_subcommand("extract", "Frames -> rPPG signal CSV");
    std::string frames_dir, mask_path, extract_out;
    extract->add_option("--frames", frames_dir, "Frame directory with manifest.json")
        ->required();
    extract->add_option("--mask", mask_path, "ROI mask file (default: built-in eye-band mask)");
    extract->add_option("--out", extract_out, "Output signal CSV")->required();

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "Signals -> five-beat windows JSONL");
    std::string pipe_in, pipe_out, screen_log, pipe_profiles;
    bool no_sqi_screen = false;
    unsigned jobs = 1;
    pipeline->add_option("--in", pipe_in, "Directory of signal CSVs")->required();
    pipeline->add_option("--out", pipe_out, "Output windows JSONL")->required();
    pipeline->add_option("--screen-log", screen_log, "Screening log JSONL");
    pipeline->add_option("--profiles", pipe_profiles, "Profiles JSONL (subject ids)");
    pipeline->add_flag("--no-sqi-screen", no_sqi_screen,
                       "Keep all windows regardless of SQI (rhythm-experiment path)");
    pipeline->add_option("--jobs", jobs, "Parallel session workers")->check(CLI::PositiveNumber);

    // train
    auto* train_cmd = app.add_subcommand("train", "Windows + labels -> checkpoint");
    std::string train_windows, train_labels, train_profiles, train_out, train_log;
    train_cmd->add_option("--windows", train_windows, "Windows JSONL")->required();
    train_cmd->add_option("--labels", train_labels, "Labels JSONL")->required();
    train_cmd->add_option("--profiles", train_profiles, "Profiles JSONL");
    train_cmd->add_option("--out", train_out, "Checkpoint JSON")->required();
    train_cmd->add_option("--log", train_log, "Training log CSV");

    // predict
    auto* predict = app.add_subcommand("predict", "Checkpoint + windows -> predictions CSV");
    std::string pred_ckpt, pred_windows, pred_profiles, pred_out;
    predict->add_option("--checkpoint", pred_ckpt, "Checkpoint JSON")->required();
    predict->add_option("--windows", pred_windows, "Windows JSONL")->required();
    predict->add_option("--profiles", pred_profiles, "Profiles JSONL");
    predict->add_option("--out", pred_out, "Predictions CSV")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Predictions + labels -> report");
    std::string eval_preds, eval_labels, eval_json, eval_table, eval_svg, eval_ba;
    eval_cmd->add_option("--predictions", eval_preds, "Predictions CSV")->required();
    eval_cmd->add_option("--labels", eval_labels, "Labels JSONL")->required();
    eval_cmd->add_option("--out-json", eval_json, "Report JSON");
    eval_cmd->add_option("--out-table", eval_table, "Report text table");
    eval_cmd->add_option("--out-svg", eval_svg, "Scatter / Bland-Altman SVG");
    eval_cmd->add_option("--out-ba", eval_ba, "Bland-Altman pairs CSV");

    // let --config/--set/--version appear after the subcommand name
    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }

    if (show_version) {
        std::cout << "checkpoint_format_version " << kCheckpointFormatVersion << "\n"
                  << "window_format_version " << kWindowFormatVersion << "\n"
                  << "feature_layout_version " << kFeatureLayoutVersion << "\n";
        return 0;
    }

    try {
        const RunConfig cfg = load_config(config_path, sets);
        if (synth->parsed()) return cmd_synth(cfg, synth_out);
        if (extract->parsed()) return cmd_extract(cfg, frames_dir, mask_path, extract_out);
        if (pipeline->parsed())
            return cmd_pipeline(cfg, pipe_in, pipe_out, screen_log, pipe_profiles,
                                no_sqi_screen, jobs);
        if (train_cmd->parsed())
            return cmd_train(cfg, train_windows, train_labels, train_profiles, train_out,
                             train_log);
        if (predict->parsed())
            return cmd_predict(cfg, pred_ckpt, pred_windows, pred_profiles, pred_out);
        if (eval_cmd->parsed())
            return cmd_eval(cfg, eval_preds, eval_labels, eval_json, eval_table, eval_svg,
                            eval_ba);
        std::cerr << "usage error: no subcommand given (see --help)\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    }
}
