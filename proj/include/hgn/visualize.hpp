#pragma once

#include <filesystem>

#include "hgn/eval.hpp"

namespace hgn::eval {

// Overlay: green dots for the 10 predicted landmarks, red arrow for the
// predicted gaze, blue arrow for the ground truth. A frontal arrow has zero
// in-plane length and is drawn as a dot marker.
void visualize(const synth::Sample& sample, const Prediction& prediction,
               const std::filesystem::path& path);

}  // namespace hgn::eval
