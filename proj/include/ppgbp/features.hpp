#pragma once

#include "ppgbp/errors.hpp"

#include <array>
#include <cstddef>
#include <string>

namespace ppgbp {

// Bump when the slot layout below changes; stored in checkpoints so a model
// can never be fed a vector with a different layout.
inline constexpr int kFeatureLayoutVersion = 1;
inline constexpr std::size_t kFeatureCount = 37;

enum class Race { WhiteNonHispanic = 0, WhiteHispanic, Asian, Black, OtherUnknown };

inline constexpr std::size_t kHistoryCount = 11;
inline constexpr const char* kHistoryNames[kHistoryCount] = {
    "dyslipidemia", "hypertension", "diabetes2", "coronary_artery_disease",
    "afib_or_flutter", "sleep_apnea", "valvular_disease", "cardiomyopathy",
    "congestive_heart_failure", "chronic_kidney_disease", "pacemaker"};

inline constexpr std::size_t kMedicationCount = 14;
inline constexpr const char* kMedicationNames[kMedicationCount] = {
    "antihypertensive_any", "acei_arb", "beta_blocker", "calcium_channel_blocker",
    "thiazide", "mra", "aspirin", "warfarin", "statin", "other_diuretic",
    "antiarrhythmic", "pde5i", "sglt2i", "arni"};

// Demographics, history, and medications feeding the baseline branch.
struct SubjectProfile {
    double age = 0.0; // years
    bool male = false;
    double bmi = 0.0; // kg/m^2
    Race race = Race::OtherUnknown;
    std::array<bool, kHistoryCount> history{};
    std::array<bool, kMedicationCount> medications{};
    bool repeat_visit = false;
};

struct FeatureNorm {
    double age_mean = 69.0;
    double age_sd = 11.7;
    double bmi_mean = 28.4;
    double bmi_sd = 5.6;
};

using FeatureVector = std::array<double, kFeatureCount>;

namespace detail {

// Antihypertensive drug classes counted for the multi-antihypertensive flag.
inline constexpr std::size_t kAntihypertensiveClasses[] = {1, 2, 3, 4, 5, 9, 13};

} // namespace detail

// Fixed 37-slot encoding:
//   [0]     z-scored age
//   [1]     sex (1 = male)
//   [2]     z-scored BMI
//   [3..7]  race one-hot
//   [8..18] history flags
//   [19..32] medication flags
//   [33]    any antiplatelet/anticoagulant (aspirin or warfarin)
//   [34]    any diabetes agent (SGLT2i)
//   [35]    on >= 2 antihypertensive classes
//   [36]    repeat visit
inline FeatureVector encode_profile(const SubjectProfile& p, const FeatureNorm& norm = {}) {
    if (p.age < 18.0 || p.age > 120.0) throw OutOfRangeAge("encode_profile: age out of [18,120]");
    if (p.bmi <= 10.0 || p.bmi >= 80.0) throw OutOfRangeBmi("encode_profile: bmi out of (10,80)");
    if (norm.age_sd <= 0.0 || norm.bmi_sd <= 0.0)
        throw NormDegenerate("encode_profile: normalization SD must be positive");

    FeatureVector v{};
    v[0] = (p.age - norm.age_mean) / norm.age_sd;
    v[1] = p.male ? 1.0 : 0.0;
    v[2] = (p.bmi - norm.bmi_mean) / norm.bmi_sd;
    v[3 + static_cast<std::size_t>(p.race)] = 1.0;
    for (std::size_t i = 0; i < kHistoryCount; ++i) v[8 + i] = p.history[i] ? 1.0 : 0.0;
    for (std::size_t i = 0; i < kMedicationCount; ++i) v[19 + i] = p.medications[i] ? 1.0 : 0.0;

    v[33] = (p.medications[6] || p.medications[7]) ? 1.0 : 0.0;
    v[34] = p.medications[12] ? 1.0 : 0.0;
    std::size_t classes = 0;
    for (std::size_t idx : detail::kAntihypertensiveClasses) classes += p.medications[idx];
    v[35] = classes >= 2 ? 1.0 : 0.0;
    v[36] = p.repeat_visit ? 1.0 : 0.0;
    return v;
}

inline Race race_from_string(const std::string& s) {
    if (s == "white_non_hispanic") return Race::WhiteNonHispanic;
    if (s == "white_hispanic") return Race::WhiteHispanic;
    if (s == "asian") return Race::Asian;
    if (s == "black") return Race::Black;
    if (s == "other_unknown") return Race::OtherUnknown;
    throw ParseError("unknown race category: " + s);
}

inline const char* race_to_string(Race r) {
    switch (r) {
        case Race::WhiteNonHispanic: return "white_non_hispanic";
        case Race::WhiteHispanic: return "white_hispanic";
        case Race::Asian: return "asian";
        case Race::Black: return "black";
        case Race::OtherUnknown: return "other_unknown";
    }
    return "other_unknown";
}

} // namespace ppgbp
