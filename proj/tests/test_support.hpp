#pragma once

// Test-only helpers and oracles. Nothing here calls into the code paths it
// is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include "bettiml/error.hpp"
#include "bettiml/imaging.hpp"
#include "bettiml/rng.hpp"

namespace testing {

using bettiml::GrayImage;
using bettiml::Rng;

inline GrayImage random_image(Rng& rng, int width, int height, int levels = 256) {
    GrayImage img(width, height);
    const int step = levels >= 256 ? 1 : 255 / (levels - 1);
    for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng.below(levels) * step);
    return img;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("bettiml_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- exact rationals for split-gain oracles ----

struct Fraction {
    __int128 num = 0;
    __int128 den = 1;  // > 0

    Fraction() = default;
    Fraction(__int128 n, __int128 d = 1) : num(n), den(d) {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        reduce();
    }
    void reduce() {
        __int128 a = num < 0 ? -num : num;
        __int128 b = den;
        while (b) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            num /= a;
            den /= a;
        }
    }
    friend Fraction operator+(Fraction a, Fraction b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
    friend Fraction operator-(Fraction a, Fraction b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
    friend Fraction operator*(Fraction a, Fraction b) { return {a.num * b.num, a.den * b.den}; }
    friend Fraction operator/(Fraction a, Fraction b) { return {a.num * b.den, a.den * b.num}; }
    friend bool operator<(Fraction a, Fraction b) { return a.num * b.den < b.num * a.den; }
    friend bool operator==(Fraction a, Fraction b) { return a.num == b.num && a.den == b.den; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct OracleSplit {
    int feature = -1;
    double threshold = 0.0;
    Fraction gain;
};

/// Exhaustive (feature, midpoint) scan with exact Newton gains. Gradients and
/// hessians are integers scaled by 1/`scale`; lambda and min_child_weight are
/// integers in the same units. Picks the maximum exact gain; ties go to the
/// smallest feature, then the smallest threshold.
inline OracleSplit brute_force_newton_split(const std::vector<std::vector<int>>& x,
                                            std::span<const std::uint32_t> rows,
                                            std::span<const long> g_units,
                                            std::span<const long> h_units, long lambda_units,
                                            long mcw_units, int n_features) {
    OracleSplit best;
    bool found = false;
    auto score = [&](long g, long h) { return Fraction(static_cast<__int128>(g) * g, h + lambda_units); };
    for (int f = 0; f < n_features; ++f) {
        std::vector<int> values;
        for (auto r : rows) values.push_back(x[r][f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double thr = (values[k] + values[k + 1]) / 2.0;
            long gl = 0, hl = 0, gr = 0, hr = 0;
            for (auto r : rows) {
                if (x[r][f] < thr) {
                    gl += g_units[r];
                    hl += h_units[r];
                } else {
                    gr += g_units[r];
                    hr += h_units[r];
                }
            }
            if (hl < mcw_units || hr < mcw_units) continue;
            // Common factor 1/(2*scale) dropped: it does not change the argmax.
            const Fraction gain = score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr);
            if (!(Fraction(0) < gain)) continue;
            if (!found || best.gain < gain) {
                best = {f, thr, gain};
                found = true;
            }
        }
    }
    return best;
}

/// Exhaustive scan with exact weighted Gini decrease
/// n*gini(parent) - nL*gini(L) - nR*gini(R). `rows` may repeat.
inline OracleSplit brute_force_gini_split(const std::vector<std::vector<int>>& x,
                                          std::span<const std::uint32_t> rows,
                                          std::span<const int> labels, int classes,
                                          std::span<const int> features) {
    OracleSplit best;
    bool found = false;
    auto weighted_gini = [&](const std::vector<long>& counts) {
        long n = 0;
        for (long c : counts) n += c;
        if (n == 0) return Fraction(0);
        Fraction sum_sq(0);
        for (long c : counts) sum_sq = sum_sq + Fraction(static_cast<__int128>(c) * c, static_cast<__int128>(n) * n);
        return Fraction(n) * (Fraction(1) - sum_sq);
    };
    std::vector<int> sorted_features(features.begin(), features.end());
    std::sort(sorted_features.begin(), sorted_features.end());
    for (int f : sorted_features) {
        std::vector<int> values;
        for (auto r : rows) values.push_back(x[r][f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double thr = (values[k] + values[k + 1]) / 2.0;
            std::vector<long> left(classes, 0), right(classes, 0), all(classes, 0);
            for (auto r : rows) {
                (x[r][f] < thr ? left : right)[labels[r]] += 1;
                all[labels[r]] += 1;
            }
            const Fraction gain = weighted_gini(all) - weighted_gini(left) - weighted_gini(right);
            if (!(Fraction(0) < gain)) continue;
            if (!found || best.gain < gain) {
                best = {f, thr, gain};
                found = true;
            }
        }
    }
    return best;
}

/// AUC as the fraction of (positive, negative) pairs ranked correctly, ties 1/2.
inline double mann_whitney_auc(std::span<const double> scores, std::span<const char> positive) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!positive[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (positive[j]) continue;
            pairs += 1.0;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / pairs;
}

/// Cyclic Jacobi eigendecomposition of a dense symmetric matrix.
/// Returns eigenvalues descending; vectors[k] is the k-th eigenvector.
inline void jacobi_eigen(std::vector<double> a, std::size_t n, std::vector<double>& values,
                         std::vector<std::vector<double>>& vectors) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p];
                    const double vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });
    values.clear();
    vectors.assign(n, std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        values.push_back(a[order[k] * n + order[k]]);
        for (std::size_t i = 0; i < n; ++i) vectors[k][i] = v[i * n + order[k]];
    }
}

/// Projections of centred rows onto the top-k covariance eigenvectors from
/// jacobi_eigen; fills `variances` with the matching eigenvalues.
inline std::vector<double> pca_oracle(std::span<const double> x, std::size_t rows, std::size_t cols,
                                      std::size_t k, std::vector<double>& variances) {
    std::vector<double> mean(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) mean[j] += x[i * cols + j];
    for (auto& m : mean) m /= static_cast<double>(rows);
    std::vector<double> cov(cols * cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t a = 0; a < cols; ++a)
            for (std::size_t b = 0; b < cols; ++b)
                cov[a * cols + b] += (x[i * cols + a] - mean[a]) * (x[i * cols + b] - mean[b]);
    for (auto& c : cov) c /= static_cast<double>(rows - 1);
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
    jacobi_eigen(cov, cols, values, vectors);
    variances.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<double> proj(rows * k, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < cols; ++j)
                proj[i * k + c] += (x[i * cols + j] - mean[j]) * vectors[c][j];
    return proj;
}

/// Largest |a - s*b| over each column c, with the sign s chosen per column.
inline double max_deviation_up_to_sign(std::span<const double> a, std::span<const double> b,
                                       std::size_t rows, std::size_t k) {
    double worst = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        double plus = 0.0, minus = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            plus = std::max(plus, std::abs(a[i * k + c] - b[i * k + c]));
            minus = std::max(minus, std::abs(a[i * k + c] + b[i * k + c]));
        }
        worst = std::max(worst, std::min(plus, minus));
    }
    return worst;
}

}  // namespace testing
