// SPDX-License-Identifier: Apache-2.0
//
// quantmimo: link-level simulation of one-bit massive MIMO uplinks
// Copyright (C) 2026 The quantmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef QUANTMIMO_COMMON_HPP
#define QUANTMIMO_COMMON_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qm
{
    using cplx = std::complex<double>;

    // Signals are stored one row per antenna (or user) so that each row is contiguous for the FFT.
    using SigMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using CMat = Eigen::MatrixXcd;
    using CVec = Eigen::VectorXcd;
    using RVec = Eigen::VectorXd;
    using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    inline constexpr double pi = std::numbers::pi;

    enum class ErrorCode
    {
        PilotTooShort,
        PilotNotCombAligned,
        TooFewAntennas,
        BadProfile,
        DataTooShort,
        BadLinkBudget,
        BadDimensions,
        InvalidArgument,
        DimensionMismatch,
        EmptyInput,
        ConfigParse,
        SingularGram,
        DegenerateMoments,
        Io
    };

    const char *error_name(ErrorCode code);

    // Usage errors map to CLI exit code 2, numerical errors to exit code 1.
    bool is_numerical(ErrorCode code);

    class Error : public std::runtime_error
    {
    public:
        Error(ErrorCode code, const std::string &what)
            : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
        ErrorCode code() const noexcept { return code_; }

    private:
        ErrorCode code_;
    };

    // Dense rank-3 complex tensor, last index fastest.
    class Tensor3
    {
    public:
        Tensor3() = default;
        Tensor3(int d0, int d1, int d2)
            : d0_(d0), d1_(d1), d2_(d2), data_(std::size_t(d0) * std::size_t(d1) * std::size_t(d2)) {}

        int dim0() const { return d0_; }
        int dim1() const { return d1_; }
        int dim2() const { return d2_; }
        std::size_t size() const { return data_.size(); }

        cplx &operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
        const cplx &operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

        cplx *fiber(int i, int j) { return data_.data() + index(i, j, 0); }
        const cplx *fiber(int i, int j) const { return data_.data() + index(i, j, 0); }

        std::vector<cplx> &raw() { return data_; }
        const std::vector<cplx> &raw() const { return data_; }

    private:
        std::size_t index(int i, int j, int k) const
        {
            return (std::size_t(i) * std::size_t(d1_) + std::size_t(j)) * std::size_t(d2_) + std::size_t(k);
        }

        int d0_ = 0, d1_ = 0, d2_ = 0;
        std::vector<cplx> data_;
    };

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
}

#endif
