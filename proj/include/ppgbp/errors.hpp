#pragma once

#include <stdexcept>
#include <string>

namespace ppgbp {

// Base for all library errors. Callers that only care about "pipeline data
// was bad" can catch this; tests catch the concrete types.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define PPGBP_DEFINE_ERROR(NAME)                                  \
    struct NAME : Error {                                         \
        explicit NAME(const std::string& msg) : Error(msg) {}     \
    }

// signal
PPGBP_DEFINE_ERROR(InvalidCutoffs);
PPGBP_DEFINE_ERROR(SignalTooShort);
PPGBP_DEFINE_ERROR(ConstantSignal);
PPGBP_DEFINE_ERROR(ZeroVariance);

// frames
PPGBP_DEFINE_ERROR(SourceTooSmall);
PPGBP_DEFINE_ERROR(EmptyMask);
PPGBP_DEFINE_ERROR(EmptyInput);
PPGBP_DEFINE_ERROR(FrameShapeMismatch);

// beats
PPGBP_DEFINE_ERROR(FewerThanTwoPeaks);
PPGBP_DEFINE_ERROR(NoBeats);
PPGBP_DEFINE_ERROR(BeatTooLong);

// features
PPGBP_DEFINE_ERROR(OutOfRangeAge);
PPGBP_DEFINE_ERROR(OutOfRangeBmi);
PPGBP_DEFINE_ERROR(NormDegenerate);

// neural
PPGBP_DEFINE_ERROR(ShapeMismatch);
PPGBP_DEFINE_ERROR(NonFiniteActivation);
PPGBP_DEFINE_ERROR(VariantInputMismatch);
PPGBP_DEFINE_ERROR(EmptyPartition);
PPGBP_DEFINE_ERROR(NoWindows);

// synth
PPGBP_DEFINE_ERROR(InvalidMorphology);

// eval
PPGBP_DEFINE_ERROR(LengthMismatch);
PPGBP_DEFINE_ERROR(DegenerateVariance);
PPGBP_DEFINE_ERROR(EmptySample);
PPGBP_DEFINE_ERROR(UnknownRhythmLabel);

// io
PPGBP_DEFINE_ERROR(ParseError);

#undef PPGBP_DEFINE_ERROR

} // namespace ppgbp
