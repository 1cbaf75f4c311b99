#pragma once

#include <string>

#include "agan/experiment.hpp"
#include "agan/spectral.hpp"

namespace agan {

// Side-by-side log-magnitude spectrograms (generated | reference) rendered to
// a 24-bit BMP with one color scale shared across both panels. When zoom is
// enabled an additional pair of panels covering the (time, frequency) window
// is drawn below.
void write_spectrogram_pair_bmp(const ComplexSpectrogram& generated,
                                const ComplexSpectrogram& reference, int sample_rate,
                                const std::string& path, const ZoomSpec& zoom = {});

}  // namespace agan
