// include/sapser/fft.h

// Copyright 2026  The sapser Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SAPSER_FFT_H_
#define SAPSER_FFT_H_

#include <complex>
#include <span>
#include <vector>

namespace sapser {

// Thin FFTW wrappers. Plans are created once per size behind a mutex;
// execution is safe from concurrent threads.

/// Real-to-complex transform of input (length n); returns n/2 + 1 bins.
std::vector<std::complex<double>> RealFft(std::span<const double> input);

/// Inverse of RealFft for an n-point signal, scaled by 1/n.
std::vector<double> InverseRealFft(std::span<const std::complex<double>> bins,
                                   size_t n);

}  // namespace sapser

#endif  // SAPSER_FFT_H_
