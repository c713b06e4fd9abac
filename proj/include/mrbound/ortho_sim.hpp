#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mrbound/certifier.hpp"

// Orthogonal systems realized exactly on K equiprobable atoms.  Every
// expectation is a finite sum, so a bound violation found here is a real
// violation, not sampling noise.

namespace mrbound {

enum class FieldKind { real, complex_field };

inline const char* to_string(FieldKind f) {
    return f == FieldKind::real ? "real" : "complex";
}

using Column = std::vector<std::complex<double>>;

struct OrthogonalSystem {
    std::int64_t n = 0;  // number of variables
    std::int64_t K = 0;  // equiprobable atoms
    FieldKind field = FieldKind::real;
    std::uint64_t seed = 0;
    std::vector<Column> columns;  // n columns of K atom values

    double variance_of(std::int64_t i) const {
        double s = 0.0;
        for (const auto& z : columns[static_cast<std::size_t>(i)]) s += std::norm(z);
        return s / static_cast<double>(K);
    }

    double total_variance() const {
        double s = 0.0;
        for (std::int64_t i = 0; i < n; ++i) s += variance_of(i);
        return s;
    }

    // max_{i<j} |(1/K) sum_w X_i conj(X_j)|
    double orthogonality_residual() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < columns.size(); ++i)
            for (std::size_t j = i + 1; j < columns.size(); ++j) {
                std::complex<double> dot{0.0, 0.0};
                for (std::int64_t w = 0; w < K; ++w)
                    dot += columns[i][static_cast<std::size_t>(w)] *
                           std::conj(columns[j][static_cast<std::size_t>(w)]);
                worst = std::max(worst, std::abs(dot) / static_cast<double>(K));
            }
        return worst;
    }
};

namespace sim_detail {

inline std::complex<double> dot(const Column& a, const Column& b) {
    std::complex<double> s{0.0, 0.0};
    for (std::size_t w = 0; w < a.size(); ++w) s += a[w] * std::conj(b[w]);
    return s;
}

inline double norm2(const Column& a) {
    double s = 0.0;
    for (const auto& z : a) s += std::norm(z);
    return s;
}

// One modified Gram-Schmidt sweep; columns come out orthonormal in the plain
// dot product.  Fails (false) on a collapsing pivot.
inline bool mgs_sweep(std::vector<Column>& cols) {
    if (cols.empty()) return true;
    const double tiny = 1e-12 * std::sqrt(static_cast<double>(cols[0].size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            std::complex<double> c = dot(cols[i], cols[j]);  // cols[j] is unit
            for (std::size_t w = 0; w < cols[i].size(); ++w)
                cols[i][w] -= c * cols[j][w];
        }
        double nrm = std::sqrt(norm2(cols[i]));
        if (!(nrm > tiny)) return false;
        for (auto& z : cols[i]) z /= nrm;
    }
    return true;
}

inline double max_offdiag(const std::vector<Column>& cols) {
    double worst = 0.0;
    for (std::size_t i = 0; i < cols.size(); ++i)
        for (std::size_t j = i + 1; j < cols.size(); ++j)
            worst = std::max(worst, std::abs(dot(cols[i], cols[j])));
    return worst;
}

inline double objective(const std::vector<Column>& cols, std::int64_t K) {
    double acc = 0.0;
    for (std::int64_t w = 0; w < K; ++w) {
        std::complex<double> s{0.0, 0.0};
        double best = 0.0;
        for (const auto& col : cols) {
            s += col[static_cast<std::size_t>(w)];
            best = std::max(best, std::norm(s));
        }
        acc += best;
    }
    return acc / static_cast<double>(K);
}

}  // namespace sim_detail

/// Random system: Gram-Schmidt (with a re-orthogonalization pass) applied to
/// seeded Gaussian columns, then column norms scaled by a random positive
/// variance allocation summing to 1.
inline OrthogonalSystem make_random_system(std::int64_t n, std::int64_t K,
                                           std::uint64_t seed,
                                           FieldKind kind = FieldKind::real) {
    if (n < 1 || K < n) throw std::invalid_argument("need K >= n >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int attempt = 0; attempt < 10; ++attempt) {
        std::vector<Column> cols(static_cast<std::size_t>(n));
        for (auto& col : cols) {
            col.resize(static_cast<std::size_t>(K));
            for (auto& z : col) {
                double re = gauss(rng);
                double im = kind == FieldKind::complex_field ? gauss(rng) : 0.0;
                z = {re, im};
            }
        }
        if (!sim_detail::mgs_sweep(cols)) continue;
        sim_detail::mgs_sweep(cols);
        std::vector<double> w(static_cast<std::size_t>(n));
        double wsum = 0.0;
        for (auto& x : w) {
            x = -std::log(1.0 - uni(rng));  // Exp(1): positive allocation
            wsum += x;
        }
        for (std::size_t i = 0; i < cols.size(); ++i) {
            double scale = std::sqrt(w[i] / wsum * static_cast<double>(K));
            for (auto& z : cols[i]) z *= scale;
        }
        OrthogonalSystem sys{n, K, kind, seed, std::move(cols)};
        if (sys.orthogonality_residual() > 1e-10) continue;
        return sys;
    }
    throw std::runtime_error("rank-deficient sample after 10 attempts");
}

/// E max_{1<=j<=n} |S_j|^2 as an exact finite sum over atoms.
inline double expected_running_max(const OrthogonalSystem& sys) {
    return sim_detail::objective(sys.columns, sys.K);
}

/// Partial sums S_0..S_n at one atom with the running max of |S_j|^2.
struct PartialSumPath {
    std::vector<std::complex<double>> sums;
    double running_max = 0.0;
};

inline std::vector<PartialSumPath> partial_sum_paths(const OrthogonalSystem& sys) {
    std::vector<PartialSumPath> paths(static_cast<std::size_t>(sys.K));
    for (std::int64_t w = 0; w < sys.K; ++w) {
        auto& p = paths[static_cast<std::size_t>(w)];
        p.sums.resize(static_cast<std::size_t>(sys.n) + 1, {0.0, 0.0});
        for (std::int64_t i = 0; i < sys.n; ++i) {
            p.sums[static_cast<std::size_t>(i) + 1] =
                p.sums[static_cast<std::size_t>(i)] +
                sys.columns[static_cast<std::size_t>(i)][static_cast<std::size_t>(w)];
            p.running_max = std::max(
                p.running_max, std::norm(p.sums[static_cast<std::size_t>(i) + 1]));
        }
    }
    return paths;
}

struct AdversarialResult {
    double value = 0.0;
    OrthogonalSystem witness;
};

namespace sim_detail {

struct AscentOutcome {
    double value = 0.0;
    std::vector<Column> cols;
};

// Applies cols + eta*dir, re-orthogonalizes with a single MGS sweep and
// renormalizes total variance while keeping the step's per-column mass ratios
// (the allocation is part of the ascent).  Commits only on improvement.
inline bool try_step(std::vector<Column>& cols, const std::vector<Column>& dir,
                     double eta, std::int64_t K, double& best) {
    std::vector<Column> cand = cols;
    for (std::size_t i = 0; i < cand.size(); ++i)
        for (std::size_t w = 0; w < cand[i].size(); ++w)
            cand[i][w] += eta * dir[i][w];

    std::vector<double> mass(cand.size());
    double msum = 0.0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        mass[i] = norm2(cand[i]);
        msum += mass[i];
        if (!(mass[i] > 0.0)) return false;
    }
    if (!mgs_sweep(cand) || max_offdiag(cand) > 1e-10) return false;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        double scale = std::sqrt(mass[i] / msum * static_cast<double>(K));
        for (auto& z : cand[i]) z *= scale;
    }
    double v = objective(cand, K);
    if (v <= best) return false;
    best = v;
    cols = std::move(cand);
    return true;
}

// Projected ascent on E max |S_j|^2.  Primary move: supergradient of the
// running max.  The objective is piecewise quadratic and its ridges stall
// plain gradient steps, so a rejected gradient move falls back to a seeded
// random coordinate perturbation; step size halves on failure with a bounded
// number of resets.
inline AscentOutcome ascend(std::int64_t n, std::int64_t K, FieldKind kind,
                            std::uint64_t seed, int iters) {
    OrthogonalSystem start = make_random_system(n, K, seed, kind);
    std::vector<Column> cols = std::move(start.columns);
    double best = objective(cols, K);
    std::mt19937_64 rng(seed ^ 0xa5b35705f00dcafeULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double eta = 0.25;
    int resets_left = 8;
    std::vector<Column> dir(cols.size(), Column(static_cast<std::size_t>(K)));
    for (int it = 0; it < iters; ++it) {
        // supergradient: 2/K * S_{j*} against every column up to the argmax
        for (auto& g : dir) std::fill(g.begin(), g.end(), std::complex<double>{0.0, 0.0});
        for (std::int64_t w = 0; w < K; ++w) {
            std::complex<double> s{0.0, 0.0};
            std::complex<double> s_at_best{0.0, 0.0};
            double best_norm = -1.0;
            std::size_t jstar = 0;
            for (std::size_t i = 0; i < cols.size(); ++i) {
                s += cols[i][static_cast<std::size_t>(w)];
                if (std::norm(s) > best_norm) {
                    best_norm = std::norm(s);
                    jstar = i;
                    s_at_best = s;
                }
            }
            std::complex<double> g = (2.0 / static_cast<double>(K)) * s_at_best;
            for (std::size_t i = 0; i <= jstar; ++i)
                dir[i][static_cast<std::size_t>(w)] = g;
        }
        bool improved = try_step(cols, dir, eta, K, best);
        if (!improved) {
            for (auto& g : dir)
                for (auto& z : g) {
                    double re = gauss(rng);
                    double im = kind == FieldKind::complex_field ? gauss(rng) : 0.0;
                    z = {re, im};
                }
            improved = try_step(cols, dir, eta, K, best);
        }
        if (improved) {
            eta = std::min(eta * 1.5, 1.0);
        } else {
            eta *= 0.5;
            if (eta < 1e-8) {
                if (resets_left-- <= 0) break;
                eta = 0.25;
            }
        }
    }
    return {best, std::move(cols)};
}

}  // namespace sim_detail

/// Best E max |S_j|^2 found over seeded restarts; a valid lower estimate of
/// D_n.  Restarts are independent and merged by maximum, so the result does
/// not depend on scheduling.  threads = 0 picks the hardware default.
inline AdversarialResult adversarial_lower_bound(std::int64_t n, std::int64_t K,
                                                 int restarts, int iters,
                                                 std::uint64_t seed,
                                                 FieldKind kind = FieldKind::real,
                                                 int threads = 0) {
    if (n < 1 || K < n) throw std::invalid_argument("need K >= n >= 1");
    if (restarts < 1 || iters < 1)
        throw std::invalid_argument("restarts and iters must be >= 1");
    std::vector<sim_detail::AscentOutcome> outcomes(static_cast<std::size_t>(restarts));
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(restarts));
    for (int r = 0; r < restarts; ++r)
        seeds[static_cast<std::size_t>(r)] =
            seed + 1000003ULL * static_cast<std::uint64_t>(r);

    unsigned hw = std::thread::hardware_concurrency();
    int nt = threads > 0 ? threads : static_cast<int>(hw ? hw : 1);
    nt = std::clamp(nt, 1, restarts);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int r = next.fetch_add(1);
            if (r >= restarts) return;
            outcomes[static_cast<std::size_t>(r)] =
                sim_detail::ascend(n, K, kind, seeds[static_cast<std::size_t>(r)], iters);
        }
    };
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nt));
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    int best_r = 0;
    for (int r = 1; r < restarts; ++r)
        if (outcomes[static_cast<std::size_t>(r)].value >
            outcomes[static_cast<std::size_t>(best_r)].value)
            best_r = r;
    auto& win = outcomes[static_cast<std::size_t>(best_r)];
    OrthogonalSystem witness{n, K, kind, seeds[static_cast<std::size_t>(best_r)],
                             std::move(win.cols)};
    return {win.value, std::move(witness)};
}

// ---- block decomposition check --------------------------------------------

struct BlockStats {
    double ea2 = 0, eb2 = 0, ec2 = 0, ed2 = 0;  // expectations of squared block maxima
    double ep2 = 0, eq2 = 0;                    // E|P_j|^2, E|Q_j|^2 segment sums
    std::vector<double> ev2, ew2;               // E|V_{j,r}|^2, E|W_{j,r}|^2, r = 1..l-1
    double mass_a = 0, mass_b = 0, mass_cd = 0; // variance masses charged by the bound
};

struct DecompositionReport {
    std::int64_t n_blocks = 0, m = 0, l = 0, p = 0;
    double dm_bound = 0, dl1_bound = 0;
    double lhs = 0, mid = 0, rhs = 0;
    bool ok = false;
    std::vector<BlockStats> blocks;
};

/// Checks, exactly on the atom space, the chain
///   E max_i min_j |S_i - S_{pj}|^2  <=  E sum_j (A_j^2+B_j^2+C_j^2+D_j^2)
///                                   <=  sum_j [D_m (mass_A + mass_B) + D_{l-1} mass_CD]
/// with certified bounds supplied for D_m and D_{l-1}.
inline DecompositionReport verify_decomposition(const OrthogonalSystem& sys,
                                                std::int64_t n_blocks,
                                                std::int64_t m, std::int64_t l,
                                                double dm_bound, double dl1_bound) {
    if (n_blocks < 1 || m < 1 || l < 2)
        throw std::invalid_argument("need n_blocks >= 1, m >= 1, l >= 2");
    std::int64_t p = 2 * m + l;
    if (sys.n != n_blocks * p)
        throw std::invalid_argument("system size must equal n_blocks*(2m+l)");

    DecompositionReport rep;
    rep.n_blocks = n_blocks;
    rep.m = m;
    rep.l = l;
    rep.p = p;
    rep.dm_bound = dm_bound;
    rep.dl1_bound = dl1_bound;
    rep.blocks.resize(static_cast<std::size_t>(n_blocks));
    for (auto& b : rep.blocks) {
        b.ev2.assign(static_cast<std::size_t>(l - 1), 0.0);
        b.ew2.assign(static_cast<std::size_t>(l - 1), 0.0);
    }

    auto paths = partial_sum_paths(sys);
    const double invK = 1.0 / static_cast<double>(sys.K);
    auto S = [&](const PartialSumPath& path, std::int64_t i) {
        return path.sums[static_cast<std::size_t>(i)];
    };

    for (const auto& path : paths) {
        double worst = 0.0;
        for (std::int64_t i = 1; i <= sys.n; ++i) {
            double closest = std::numeric_limits<double>::infinity();
            for (std::int64_t j = 0; j <= n_blocks; ++j)
                closest = std::min(closest, std::norm(S(path, i) - S(path, p * j)));
            worst = std::max(worst, closest);
        }
        rep.lhs += worst * invK;

        for (std::int64_t j = 0; j < n_blocks; ++j) {
            auto& b = rep.blocks[static_cast<std::size_t>(j)];
            double a2 = 0.0, b2 = 0.0, c2 = 0.0, d2 = 0.0;
            for (std::int64_t i = p * j; i <= p * j + m; ++i)
                a2 = std::max(a2, std::norm(S(path, i) - S(path, p * j)));
            for (std::int64_t i = p * j + m + l; i <= p * (j + 1); ++i)
                b2 = std::max(b2, std::norm(S(path, p * (j + 1)) - S(path, i)));
            for (std::int64_t r = 1; r <= l - 1; ++r) {
                std::int64_t i = p * j + m + r;
                double v2 = std::norm(S(path, i) - S(path, p * j + m));
                double w2 = std::norm(S(path, p * j + m + l) - S(path, i));
                c2 = std::max(c2, v2);
                d2 = std::max(d2, w2);
                b.ev2[static_cast<std::size_t>(r - 1)] += v2 * invK;
                b.ew2[static_cast<std::size_t>(r - 1)] += w2 * invK;
            }
            b.ea2 += a2 * invK;
            b.eb2 += b2 * invK;
            b.ec2 += c2 * invK;
            b.ed2 += d2 * invK;
            b.ep2 += std::norm(S(path, p * j + m) - S(path, p * j)) * invK;
            b.eq2 += std::norm(S(path, p * (j + 1)) - S(path, p * j + m + l)) * invK;
        }
    }

    for (std::int64_t j = 0; j < n_blocks; ++j) {
        auto& b = rep.blocks[static_cast<std::size_t>(j)];
        for (std::int64_t k = 1; k <= m; ++k) {
            b.mass_a += sys.variance_of(p * j + k - 1);
            b.mass_b += sys.variance_of(p * j + m + l + k - 1);
        }
        b.mass_cd = sys.variance_of(p * j + m) + sys.variance_of(p * j + m + l - 1);
        for (std::int64_t k = 2; k <= l - 1; ++k)
            b.mass_cd += 2.0 * sys.variance_of(p * j + m + k - 1);
        rep.mid += b.ea2 + b.eb2 + b.ec2 + b.ed2;
        rep.rhs += dm_bound * (b.mass_a + b.mass_b) + dl1_bound * b.mass_cd;
    }

    double slack = 1e-9 * std::max({1.0, rep.mid, rep.rhs});
    rep.ok = rep.lhs <= rep.mid + slack && rep.mid <= rep.rhs + slack;
    return rep;
}

/// Same check with D_m and D_{l-1} taken from the certified bound search.
inline DecompositionReport verify_decomposition(const OrthogonalSystem& sys,
                                                std::int64_t n_blocks,
                                                std::int64_t m, std::int64_t l) {
    double dm = best_bound(m).final_bound.hi();
    double dl1 = best_bound(l - 1).final_bound.hi();
    return verify_decomposition(sys, n_blocks, m, l, dm, dl1);
}

// ---- JSON ------------------------------------------------------------------

inline nlohmann::json to_json(const OrthogonalSystem& sys) {
    nlohmann::json j;
    j["n"] = sys.n;
    j["K"] = sys.K;
    j["field_kind"] = to_string(sys.field);
    j["seed"] = sys.seed;
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& col : sys.columns) {
        nlohmann::json jc = nlohmann::json::array();
        for (const auto& z : col) {
            if (sys.field == FieldKind::real)
                jc.push_back(z.real());
            else
                jc.push_back(nlohmann::json::array({z.real(), z.imag()}));
        }
        cols.push_back(jc);
    }
    j["columns"] = cols;
    return j;
}

inline OrthogonalSystem system_from_json(const nlohmann::json& j) {
    OrthogonalSystem sys;
    sys.n = j.at("n").get<std::int64_t>();
    sys.K = j.at("K").get<std::int64_t>();
    auto fk = j.at("field_kind").get<std::string>();
    if (fk == "real") sys.field = FieldKind::real;
    else if (fk == "complex") sys.field = FieldKind::complex_field;
    else throw std::runtime_error("bad field_kind");
    sys.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jc : j.at("columns")) {
        Column col;
        for (const auto& v : jc) {
            if (v.is_array())
                col.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            else
                col.push_back({v.get<double>(), 0.0});
        }
        sys.columns.push_back(std::move(col));
    }
    if (sys.columns.size() != static_cast<std::size_t>(sys.n))
        throw std::runtime_error("column count mismatch");
    for (const auto& c : sys.columns)
        if (c.size() != static_cast<std::size_t>(sys.K))
            throw std::runtime_error("atom count mismatch");
    return sys;
}

inline nlohmann::json to_json(const DecompositionReport& rep) {
    nlohmann::json j;
    j["n_blocks"] = rep.n_blocks;
    j["m"] = rep.m;
    j["l"] = rep.l;
    j["p"] = rep.p;
    j["dm_bound"] = rep.dm_bound;
    j["dl1_bound"] = rep.dl1_bound;
    j["lhs"] = rep.lhs;
    j["mid"] = rep.mid;
    j["rhs"] = rep.rhs;
    j["ok"] = rep.ok;
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : rep.blocks)
        blocks.push_back({{"a2", b.ea2},
                          {"b2", b.eb2},
                          {"c2", b.ec2},
                          {"d2", b.ed2},
                          {"p2", b.ep2},
                          {"q2", b.eq2},
                          {"v2", b.ev2},
                          {"w2", b.ew2},
                          {"mass_a", b.mass_a},
                          {"mass_b", b.mass_b},
                          {"mass_cd", b.mass_cd}});
    j["blocks"] = blocks;
    return j;
}

}  // namespace mrbound
