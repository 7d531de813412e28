#pragma once

#include "ppgbp/beats.hpp"
#include "ppgbp/errors.hpp"
#include "ppgbp/eval.hpp"
#include "ppgbp/features.hpp"
#include "ppgbp/model.hpp"
#include "ppgbp/signal.hpp"
#include "ppgbp/synth.hpp"
#include "ppgbp/train.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace ppgbp {

inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr int kWindowFormatVersion = 1;

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Signal CSV: header line `fs=<Hz>`, one sample per line.
// ---------------------------------------------------------------------------

inline void write_signal_csv(const TimeSeries& x, std::ostream& os) {
    os << "fs=" << json(x.fs).dump() << "\n";
    for (double v : x.samples) os << json(v).dump() << "\n";
}

inline void write_signal_csv(const TimeSeries& x, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    write_signal_csv(x, os);
}

inline TimeSeries read_signal_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("fs=", 0) != 0)
        throw ParseError("signal CSV: missing fs= header");
    TimeSeries x;
    x.fs = std::stod(line.substr(3));
    if (!(x.fs > 0.0) || !std::isfinite(x.fs)) throw ParseError("signal CSV: bad sampling rate");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        x.samples.push_back(std::stod(line));
    }
    return x;
}

inline TimeSeries read_signal_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    return read_signal_csv(is);
}

// ---------------------------------------------------------------------------
// Windows JSONL: one five-beat window per line.
// ---------------------------------------------------------------------------

struct WindowRecord {
    std::string session_id;
    std::string subject_id;
    std::size_t start_beat_index = 0;
    double mean_sqi = 0.0;
    std::vector<std::vector<double>> beats; // 5 x 512 padded
};

inline void write_window_jsonl(const std::vector<WindowRecord>& windows, std::ostream& os) {
    for (const auto& w : windows) {
        json j;
        j["session"] = w.session_id;
        j["subject"] = w.subject_id;
        j["start_beat_index"] = w.start_beat_index;
        j["mean_sqi"] = w.mean_sqi;
        j["beats"] = w.beats;
        os << j.dump() << "\n";
    }
}

inline std::vector<WindowRecord> read_window_jsonl(std::istream& is) {
    std::vector<WindowRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        WindowRecord w;
        w.session_id = j.at("session").get<std::string>();
        w.subject_id = j.value("subject", w.session_id);
        w.start_beat_index = j.at("start_beat_index").get<std::size_t>();
        w.mean_sqi = j.at("mean_sqi").get<double>();
        w.beats = j.at("beats").get<std::vector<std::vector<double>>>();
        if (w.beats.size() != kWindowBeats)
            throw ParseError("window record: expected 5 beats");
        for (const auto& b : w.beats)
            if (b.size() != kPaddedBeatLen)
                throw ParseError("window record: beat not padded to 512");
        out.push_back(std::move(w));
    }
    return out;
}

inline std::vector<WindowRecord> read_window_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    return read_window_jsonl(is);
}

// ---------------------------------------------------------------------------
// Labels JSONL
// ---------------------------------------------------------------------------

struct LabelRecord {
    std::string session_id;
    double true_sbp = 0.0;
    double true_dbp = 0.0;
    Rhythm rhythm = Rhythm::NSR;
};

inline void write_labels_jsonl(const std::vector<LabelRecord>& labels, std::ostream& os) {
    for (const auto& l : labels) {
        json j;
        j["session"] = l.session_id;
        j["true_sbp"] = l.true_sbp;
        j["true_dbp"] = l.true_dbp;
        j["rhythm"] = rhythm_to_string(l.rhythm);
        os << j.dump() << "\n";
    }
}

inline std::vector<LabelRecord> read_labels_jsonl(std::istream& is) {
    std::vector<LabelRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        LabelRecord l;
        l.session_id = j.at("session").get<std::string>();
        l.true_sbp = j.at("true_sbp").get<double>();
        l.true_dbp = j.at("true_dbp").get<double>();
        l.rhythm = rhythm_from_string(j.value("rhythm", "NSR"));
        out.push_back(std::move(l));
    }
    return out;
}

inline std::vector<LabelRecord> read_labels_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    return read_labels_jsonl(is);
}

// ---------------------------------------------------------------------------
// Profiles JSONL: one subject-session per line. Missing boolean fields
// default to false with a warning on the given stream.
// ---------------------------------------------------------------------------

struct ProfileRecord {
    std::string session_id;
    std::string subject_id;
    SubjectProfile profile;
};

inline void write_profiles_jsonl(const std::vector<ProfileRecord>& profiles, std::ostream& os) {
    for (const auto& p : profiles) {
        json j;
        j["session"] = p.session_id;
        j["subject"] = p.subject_id;
        j["age"] = p.profile.age;
        j["sex"] = p.profile.male ? "male" : "female";
        j["bmi"] = p.profile.bmi;
        j["race"] = race_to_string(p.profile.race);
        for (std::size_t i = 0; i < kHistoryCount; ++i)
            j[kHistoryNames[i]] = p.profile.history[i];
        for (std::size_t i = 0; i < kMedicationCount; ++i)
            j[kMedicationNames[i]] = p.profile.medications[i];
        j["repeat_visit"] = p.profile.repeat_visit;
        os << j.dump() << "\n";
    }
}

inline std::vector<ProfileRecord> read_profiles_jsonl(std::istream& is,
                                                      std::ostream* warn = nullptr) {
    std::vector<ProfileRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line);
        ProfileRecord r;
        r.session_id = j.at("session").get<std::string>();
        r.subject_id = j.value("subject", r.session_id);
        r.profile.age = j.at("age").get<double>();
        r.profile.male = j.at("sex").get<std::string>() == "male";
        r.profile.bmi = j.at("bmi").get<double>();
        r.profile.race = race_from_string(j.at("race").get<std::string>());
        auto get_flag = [&](const char* name) {
            if (j.contains(name)) return j.at(name).get<bool>();
            if (warn)
                *warn << "warning: profiles line " << lineno << ": missing flag '" << name
                      << "', defaulting to false\n";
            return false;
        };
        for (std::size_t i = 0; i < kHistoryCount; ++i)
            r.profile.history[i] = get_flag(kHistoryNames[i]);
        for (std::size_t i = 0; i < kMedicationCount; ++i)
            r.profile.medications[i] = get_flag(kMedicationNames[i]);
        r.profile.repeat_visit = get_flag("repeat_visit");
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<ProfileRecord> read_profiles_jsonl(const std::string& path,
                                                      std::ostream* warn = nullptr) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    return read_profiles_jsonl(is, warn);
}

// ---------------------------------------------------------------------------
// Model checkpoint: single JSON document.
// ---------------------------------------------------------------------------

inline json model_config_to_json(const ModelConfig& c) {
    json j;
    j["conv_kernels"] = c.conv_kernels;
    j["conv_channels"] = c.conv_channels;
    j["pool_after_layers"] = c.pool_after_layers;
    j["vit_heads"] = c.vit_heads;
    j["vit_ff_dim"] = c.vit_ff_dim;
    j["vit_depth"] = c.vit_depth;
    j["ppg_embed_dim"] = c.ppg_embed_dim;
    j["baseline_hidden"] = c.baseline_hidden;
    j["baseline_out"] = c.baseline_out;
    j["fusion_dim"] = c.fusion_dim;
    j["head"] = head_to_string(c.head);
    j["variant"] = variant_to_string(c.variant);
    j["input_len"] = c.input_len;
    j["input_channels"] = c.input_channels;
    return j;
}

inline ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    c.conv_kernels = j.at("conv_kernels").get<std::vector<std::size_t>>();
    c.conv_channels = j.at("conv_channels").get<std::vector<std::size_t>>();
    c.pool_after_layers = j.at("pool_after_layers").get<std::vector<std::size_t>>();
    c.vit_heads = j.at("vit_heads").get<std::size_t>();
    c.vit_ff_dim = j.at("vit_ff_dim").get<std::size_t>();
    c.vit_depth = j.at("vit_depth").get<std::size_t>();
    c.ppg_embed_dim = j.at("ppg_embed_dim").get<std::size_t>();
    c.baseline_hidden = j.at("baseline_hidden").get<std::vector<std::size_t>>();
    c.baseline_out = j.at("baseline_out").get<std::size_t>();
    c.fusion_dim = j.at("fusion_dim").get<std::size_t>();
    c.head = head_from_string(j.at("head").get<std::string>());
    c.variant = variant_from_string(j.at("variant").get<std::string>());
    c.input_len = j.at("input_len").get<std::size_t>();
    c.input_channels = j.at("input_channels").get<std::size_t>();
    return c;
}

inline void save_checkpoint(const Model& model, const FeatureNorm& norm, std::ostream& os) {
    json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["feature_layout_version"] = kFeatureLayoutVersion;
    j["model_config"] = model_config_to_json(model.config());
    j["rng_seed"] = model.seed();
    j["norm"] = {{"age_mean", norm.age_mean},
                 {"age_sd", norm.age_sd},
                 {"bmi_mean", norm.bmi_mean},
                 {"bmi_sd", norm.bmi_sd}};
    json tensors = json::array();
    for (const auto& p : model.params().all()) {
        json t;
        t["name"] = p->name;
        t["shape"] = p->shape;
        t["values"] = p->v;
        tensors.push_back(std::move(t));
    }
    j["tensors"] = std::move(tensors);
    os << j.dump() << "\n";
}

inline void save_checkpoint(const Model& model, const FeatureNorm& norm,
                            const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    save_checkpoint(model, norm, os);
}

struct LoadedCheckpoint {
    std::unique_ptr<Model> model;
    FeatureNorm norm;
};

inline LoadedCheckpoint load_checkpoint(std::istream& is) {
    json j = json::parse(is);
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion)
        throw ParseError("checkpoint: unsupported format_version");
    if (j.at("feature_layout_version").get<int>() != kFeatureLayoutVersion)
        throw ParseError("checkpoint: feature layout version mismatch");
    LoadedCheckpoint lc;
    auto config = model_config_from_json(j.at("model_config"));
    lc.model = std::make_unique<Model>(config, j.value("rng_seed", std::uint64_t{0}));
    const auto& n = j.at("norm");
    lc.norm.age_mean = n.at("age_mean").get<double>();
    lc.norm.age_sd = n.at("age_sd").get<double>();
    lc.norm.bmi_mean = n.at("bmi_mean").get<double>();
    lc.norm.bmi_sd = n.at("bmi_sd").get<double>();
    for (const auto& t : j.at("tensors")) {
        auto* p = lc.model->params().find(t.at("name").get<std::string>());
        if (!p) throw ParseError("checkpoint: unknown tensor " + t.at("name").get<std::string>());
        auto values = t.at("values").get<std::vector<double>>();
        if (values.size() != p->size())
            throw ParseError("checkpoint: tensor size mismatch for " + p->name);
        p->v = std::move(values);
    }
    return lc;
}

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    return load_checkpoint(is);
}

// ---------------------------------------------------------------------------
// Training log CSV
// ---------------------------------------------------------------------------

inline void write_train_log_csv(const std::vector<EpochStats>& history, std::ostream& os) {
    os << "epoch,train_loss,val_loss\n";
    for (const auto& e : history)
        os << e.epoch << "," << json(e.train_loss).dump() << "," << json(e.val_loss).dump()
           << "\n";
}

// ---------------------------------------------------------------------------
// Predictions CSV
// ---------------------------------------------------------------------------

struct PredictionRecord {
    std::string session_id;
    // regression
    double sbp = 0.0, dbp = 0.0;
    // classification
    bool positive = false;
    double probability = 0.0;
    bool is_class = false;
};

inline void write_predictions_csv(const std::vector<PredictionRecord>& preds, std::ostream& os) {
    if (!preds.empty() && preds.front().is_class) {
        os << "session,class,probability\n";
        for (const auto& p : preds)
            os << p.session_id << "," << (p.positive ? 1 : 0) << ","
               << json(p.probability).dump() << "\n";
    } else {
        os << "session,sbp,dbp\n";
        for (const auto& p : preds)
            os << p.session_id << "," << json(p.sbp).dump() << "," << json(p.dbp).dump() << "\n";
    }
}

inline std::vector<PredictionRecord> read_predictions_csv(std::istream& is) {
    std::vector<PredictionRecord> out;
    std::string line;
    if (!std::getline(is, line)) throw ParseError("predictions CSV: empty file");
    const bool is_class = line == "session,class,probability";
    if (!is_class && line != "session,sbp,dbp")
        throw ParseError("predictions CSV: unrecognized header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string sid, f1, f2;
        if (!std::getline(ss, sid, ',') || !std::getline(ss, f1, ',') || !std::getline(ss, f2))
            throw ParseError("predictions CSV: malformed line");
        PredictionRecord p;
        p.session_id = sid;
        p.is_class = is_class;
        if (is_class) {
            p.positive = std::stoi(f1) != 0;
            p.probability = std::stod(f2);
        } else {
            p.sbp = std::stod(f1);
            p.dbp = std::stod(f2);
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<PredictionRecord> read_predictions_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    return read_predictions_csv(is);
}

// ---------------------------------------------------------------------------
// Mask file: 72 lines of 72 characters, '1' include / '0' exclude.
// ---------------------------------------------------------------------------

inline void write_mask(const RoiMask& mask, std::ostream& os) {
    for (std::size_t r = 0; r < kRoiSize; ++r) {
        for (std::size_t c = 0; c < kRoiSize; ++c) os << (mask.at(r, c) ? '1' : '0');
        os << "\n";
    }
}

inline RoiMask read_mask(std::istream& is) {
    RoiMask mask;
    std::string line;
    for (std::size_t r = 0; r < kRoiSize; ++r) {
        if (!std::getline(is, line) || line.size() < kRoiSize)
            throw ParseError("mask file: expected 72 lines of 72 characters");
        for (std::size_t c = 0; c < kRoiSize; ++c) {
            if (line[c] != '0' && line[c] != '1')
                throw ParseError("mask file: characters must be 0 or 1");
            mask.set(r, c, line[c] == '1');
        }
    }
    if (mask.count() == 0) throw EmptyMask("mask file: no included cells");
    return mask;
}

inline RoiMask read_mask(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    return read_mask(is);
}

} // namespace ppgbp
