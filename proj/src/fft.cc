// src/fft.cc

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

#include "sapser/fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "sapser/error.h"

namespace sapser {
namespace {

std::mutex plan_mutex;

// Plans live for the whole process.
fftw_plan GetPlan(size_t n, bool forward) {
  static std::map<std::pair<size_t, bool>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = plans.find({n, forward});
  if (it != plans.end()) return it->second;
  double *real = fftw_alloc_real(n);
  fftw_complex *cplx = fftw_alloc_complex(n / 2 + 1);
  const int len = static_cast<int>(n);
  fftw_plan plan =
      forward ? fftw_plan_dft_r2c_1d(len, real, cplx,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED)
              : fftw_plan_dft_c2r_1d(len, cplx, real,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(real);
  fftw_free(cplx);
  if (plan == nullptr) Fail(ErrorCode::kInvalidArgument, "FFTW plan failed");
  plans.emplace(std::make_pair(n, forward), plan);
  return plan;
}

}  // namespace

std::vector<std::complex<double>> RealFft(std::span<const double> input) {
  const size_t n = input.size();
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "empty FFT input");
  fftw_plan plan = GetPlan(n, true);
  std::vector<double> in(input.begin(), input.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(plan, in.data(),
                       reinterpret_cast<fftw_complex *>(out.data()));
  return out;
}

std::vector<double> InverseRealFft(std::span<const std::complex<double>> bins,
                                   size_t n) {
  if (bins.size() != n / 2 + 1)
    Fail(ErrorCode::kShapeMismatch, "inverse FFT bin count");
  fftw_plan plan = GetPlan(n, false);
  std::vector<std::complex<double>> in(bins.begin(), bins.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex *>(in.data()),
                       out.data());
  for (double &v : out) v /= static_cast<double>(n);
  return out;
}

}  // namespace sapser
