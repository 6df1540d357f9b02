#include "eacsi/mtypes.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "eacsi/random.h"

namespace eacsi {

namespace {

constexpr double kCompareSlack = 1e-12;
constexpr double kClassTol = 1e-9;

long checked_power(int dim, int n, long cap, const char* what) {
    if (dim <= 0 || n <= 0) {
        throw InvalidArgument(std::string(what) + ": dimension and block length must be positive");
    }
    long total = 1;
    for (int i = 0; i < n; ++i) {
        total *= dim;
        if (total > cap) {
            std::ostringstream os;
            os << what << ": dimension " << dim << "^" << n << " exceeds the cap " << cap;
            throw InvalidArgument(os.str());
        }
    }
    return total;
}

// Calls f on every composition of `total` into `parts` nonnegative parts
// with lo[k] <= c[k] <= hi[k], in ascending lexicographic order.
void for_each_composition(int total, const std::vector<int>& lo, const std::vector<int>& hi,
                          const std::function<void(const std::vector<int>&)>& f) {
    const int parts = static_cast<int>(lo.size());
    std::vector<int> c(parts, 0);
    std::vector<int> suffix_lo(parts + 1, 0), suffix_hi(parts + 1, 0);
    for (int k = parts - 1; k >= 0; --k) {
        suffix_lo[k] = suffix_lo[k + 1] + lo[k];
        suffix_hi[k] = suffix_hi[k + 1] + hi[k];
    }
    std::function<void(int, int)> rec = [&](int k, int left) {
        if (k == parts - 1) {
            if (left >= lo[k] && left <= hi[k]) {
                c[k] = left;
                f(c);
            }
            return;
        }
        const int from = std::max(lo[k], left - suffix_hi[k + 1]);
        const int to = std::min(hi[k], left - suffix_lo[k + 1]);
        for (int v = from; v <= to; ++v) {
            c[k] = v;
            rec(k + 1, left - v);
        }
    };
    if (parts > 0) {
        rec(0, total);
    }
}

double log_multinomial_e(int n, const std::vector<int>& counts) {
    double out = std::lgamma(n + 1.0);
    for (int c : counts) {
        out -= std::lgamma(c + 1.0);
    }
    return out;
}

bool within(double empirical, double p, double delta) { return std::abs(empirical - p) <= delta + kCompareSlack; }

}  // namespace

std::vector<double> TypeVector::empirical() const {
    std::vector<double> out;
    for (int c : counts) {
        out.push_back(n > 0 ? static_cast<double>(c) / n : 0.0);
    }
    return out;
}

void Projector::validate() const {
    if (matrix.rows() != dim || matrix.cols() != dim) {
        throw InvalidArgument("projector: matrix shape does not match dim");
    }
    if (hermitian_residual(matrix) > 1e-9) {
        throw InvalidArgument("projector is not Hermitian");
    }
    const double idem = max_abs_entry(matrix * matrix - matrix);
    if (idem > 1e-9) {
        throw InvalidArgument("projector idempotence residual " + std::to_string(idem));
    }
}

TypeVector type_of(const std::vector<int>& xn, int alphabet_size) {
    if (alphabet_size <= 0) {
        throw InvalidArgument("type_of: alphabet must be non-empty");
    }
    TypeVector t{static_cast<int>(xn.size()), std::vector<int>(alphabet_size, 0)};
    for (int x : xn) {
        if (x < 0 || x >= alphabet_size) {
            throw InvalidArgument("type_of: symbol " + std::to_string(x) + " is not in the alphabet");
        }
        ++t.counts[x];
    }
    return t;
}

TypeVector type_of(const std::vector<std::string>& xn, const std::vector<std::string>& alphabet) {
    std::vector<int> idx;
    for (const auto& x : xn) {
        const auto it = std::find(alphabet.begin(), alphabet.end(), x);
        if (it == alphabet.end()) {
            throw InvalidArgument("type_of: symbol '" + x + "' is not in the alphabet");
        }
        idx.push_back(static_cast<int>(it - alphabet.begin()));
    }
    return type_of(idx, static_cast<int>(alphabet.size()));
}

std::vector<TypeVector> enumerate_types(int n, int alphabet_size) {
    if (n < 0 || alphabet_size <= 0) {
        throw InvalidArgument("enumerate_types: need n >= 0 and a non-empty alphabet");
    }
    std::vector<TypeVector> out;
    const std::vector<int> lo(alphabet_size, 0), hi(alphabet_size, n);
    for_each_composition(n, lo, hi, [&](const std::vector<int>& c) { out.push_back(TypeVector{n, c}); });
    return out;
}

BigInt multinomial(int n, const std::vector<int>& counts) {
    // Product of binomials, each exact.
    BigInt out = 1;
    int used = 0;
    for (int c : counts) {
        if (c < 0) {
            throw InvalidArgument("multinomial: negative count");
        }
        for (int k = 1; k <= c; ++k) {
            out *= (used + k);
            out /= k;
        }
        used += c;
    }
    if (used != n) {
        throw InvalidArgument("multinomial: counts sum to " + std::to_string(used) + ", not " + std::to_string(n));
    }
    return out;
}

BigInt type_class_size(const TypeVector& t, int n_cap) {
    if (t.n > n_cap) {
        throw InvalidArgument("type_class_size: n = " + std::to_string(t.n) + " exceeds the cap " +
                              std::to_string(n_cap));
    }
    return multinomial(t.n, t.counts);
}

double log2_multinomial(int n, const std::vector<int>& counts) { return log_multinomial_e(n, counts) / std::log(2.0); }

std::vector<int> sequence_digits(long index, int dim, int n) {
    std::vector<int> d(n);
    for (int i = n - 1; i >= 0; --i) {
        d[i] = static_cast<int>(index % dim);
        index /= dim;
    }
    return d;
}

long sequence_index(const std::vector<int>& digits, int dim) {
    long idx = 0;
    for (int x : digits) {
        idx = idx * dim + x;
    }
    return idx;
}

std::vector<long> type_class_members(const TypeVector& t, int dim) {
    if (static_cast<int>(t.counts.size()) != dim) {
        throw InvalidArgument("type_class_members: type alphabet size does not match dim");
    }
    const long total = checked_power(dim, t.n, kDenseCap, "type_class_members");
    std::vector<long> out;
    for (long i = 0; i < total; ++i) {
        if (type_of(sequence_digits(i, dim, t.n), dim) == t) {
            out.push_back(i);
        }
    }
    return out;
}

bool is_jointly_typical(const std::vector<int>& sn, const std::vector<int>& xn, const JointPmf& p_sx, double delta) {
    if (sn.size() != xn.size()) {
        throw InvalidArgument("is_jointly_typical: sequences have different lengths");
    }
    if (p_sx.empty() || p_sx.front().empty()) {
        throw InvalidArgument("is_jointly_typical: empty pmf");
    }
    const int ns = static_cast<int>(p_sx.size());
    const int nx = static_cast<int>(p_sx.front().size());
    const int n = static_cast<int>(sn.size());
    std::vector<int> counts(ns * nx, 0);
    for (int i = 0; i < n; ++i) {
        if (sn[i] < 0 || sn[i] >= ns || xn[i] < 0 || xn[i] >= nx) {
            throw InvalidArgument("is_jointly_typical: symbol out of range");
        }
        ++counts[sn[i] * nx + xn[i]];
    }
    for (int s = 0; s < ns; ++s) {
        for (int x = 0; x < nx; ++x) {
            const int c = counts[s * nx + x];
            const double p = p_sx[s][x];
            if (p <= 0.0) {
                if (c > 0) {
                    return false;
                }
            } else if (!within(n > 0 ? double(c) / n : 0.0, p, delta)) {
                return false;
            }
        }
    }
    return true;
}

Projector type_projector(const TypeVector& t, int dim, int n, long cap) {
    if (t.n != n || static_cast<int>(t.counts.size()) != dim) {
        throw InvalidArgument("type_projector: type does not match (n, dim)");
    }
    const long total = checked_power(dim, n, cap, "type_projector");
    Projector p{static_cast<int>(total), CMatrix::Zero(total, total)};
    for (long i = 0; i < total; ++i) {
        if (type_of(sequence_digits(i, dim, n), dim) == t) {
            p.matrix(i, i) = 1.0;
        }
    }
    return p;
}

EigenClasses eigen_classes(const CMatrix& rho) {
    const Spectrum sp = eig_hermitian(rho);
    const int d = static_cast<int>(sp.eigenvalues.size());
    EigenClasses ec;
    ec.eigenvectors = CMatrix(d, d);
    ec.eigenvalues = RVector(d);
    ec.class_of.resize(d);
    for (int k = 0; k < d; ++k) {
        const int src = d - 1 - k;  // descending
        double lam = sp.eigenvalues(src);
        if (lam <= kClipTol) {
            lam = 0.0;
        }
        ec.eigenvectors.col(k) = sp.eigenvectors.col(src);
        ec.eigenvalues(k) = lam;
        if (ec.values.empty() || std::abs(ec.values.back() - lam) > kClassTol) {
            ec.values.push_back(lam);
            ec.multiplicity.push_back(0);
        }
        ++ec.multiplicity.back();
        ec.class_of[k] = ec.size() - 1;
    }
    // Class value is the mean of its members so class weights sum to one.
    int k = 0;
    for (int c = 0; c < ec.size(); ++c) {
        double sum = 0.0;
        for (int j = 0; j < ec.multiplicity[c]; ++j) {
            sum += ec.eigenvalues(k + j);
        }
        ec.values[c] = ec.values[c] == 0.0 ? 0.0 : sum / ec.multiplicity[c];
        k += ec.multiplicity[c];
    }
    return ec;
}

bool counts_typical(const std::vector<int>& class_counts, const EigenClasses& ec, int n, double delta) {
    for (int c = 0; c < ec.size(); ++c) {
        if (ec.values[c] == 0.0) {
            if (class_counts[c] > 0) {
                return false;
            }
        } else if (!within(static_cast<double>(class_counts[c]) / n, ec.weight(c), delta)) {
            return false;
        }
    }
    return true;
}

namespace {

double class_constant(const EigenClasses& ec) {
    double c = 0.0;
    for (double v : ec.values) {
        if (v > 0.0) {
            c += -std::log2(v);
        }
    }
    return c;
}

}  // namespace

CMatrix conjugate_by_power(const CMatrix& m, const CMatrix& w, int n) {
    const std::vector<int> dims(n, static_cast<int>(w.rows()));
    CMatrix out = m;
    for (int i = 0; i < n; ++i) {
        out = apply_left(w, out, dims, i);
        out = apply_right_adjoint(out, w, dims, i);
    }
    return out;
}

TypicalProjector typical_projector(const DensityOperator& rho, int n, double delta, long cap) {
    if (delta < 0) {
        throw InvalidArgument("typical_projector: delta must be non-negative");
    }
    const int d = rho.dim();
    const long total = checked_power(d, n, cap, "typical_projector");
    const EigenClasses ec = eigen_classes(rho.matrix());
    TypicalProjector out;
    out.entropy = entropy_bits(rho.matrix());
    out.c = class_constant(ec);

    CMatrix diag = CMatrix::Zero(total, total);
    std::vector<int> cc(ec.size());
    for (long i = 0; i < total; ++i) {
        std::fill(cc.begin(), cc.end(), 0);
        const std::vector<int> digits = sequence_digits(i, d, n);
        double w = 1.0;
        for (int x : digits) {
            ++cc[ec.class_of[x]];
            w *= ec.eigenvalues(x);
        }
        if (counts_typical(cc, ec, n, delta)) {
            diag(i, i) = 1.0;
            out.weight += w;
        }
    }
    out.proj = Projector{static_cast<int>(total), conjugate_by_power(diag, ec.eigenvectors, n)};
    return out;
}

TypicalSummary typical_summary(const DensityOperator& rho, int n, double delta) {
    if (n <= 0 || delta < 0) {
        throw InvalidArgument("typical_summary: need n > 0 and delta >= 0");
    }
    const EigenClasses ec = eigen_classes(rho.matrix());
    TypicalSummary out;
    out.entropy = entropy_bits(rho.matrix());
    out.c = class_constant(ec);
    out.min_exponent = std::numeric_limits<double>::infinity();
    out.max_exponent = -std::numeric_limits<double>::infinity();
    const std::vector<int> lo(ec.size(), 0), hi(ec.size(), n);
    for_each_composition(n, lo, hi, [&](const std::vector<int>& cc) {
        if (!counts_typical(cc, ec, n, delta)) {
            return;
        }
        const double lm = log_multinomial_e(n, cc);
        double log_rank = lm, log_weight = lm, exponent = 0.0;
        for (int c = 0; c < ec.size(); ++c) {
            if (cc[c] == 0) {
                continue;
            }
            log_rank += cc[c] * std::log(static_cast<double>(ec.multiplicity[c]));
            log_weight += cc[c] * std::log(ec.weight(c));
            exponent += -cc[c] * std::log2(ec.values[c]);
        }
        out.rank += std::exp(log_rank);
        out.weight += std::exp(log_weight);
        out.min_exponent = std::min(out.min_exponent, exponent / n);
        out.max_exponent = std::max(out.max_exponent, exponent / n);
    });
    out.log2_rank = out.rank > 0 ? std::log2(out.rank) : -std::numeric_limits<double>::infinity();
    return out;
}

std::vector<double> marginal_s(const JointPmf& p_sx) {
    std::vector<double> out;
    for (const auto& row : p_sx) {
        double sum = 0.0;
        for (double p : row) sum += p;
        out.push_back(sum);
    }
    return out;
}

std::vector<double> marginal_x(const JointPmf& p_sx) {
    std::vector<double> out(p_sx.front().size(), 0.0);
    for (const auto& row : p_sx) {
        for (size_t x = 0; x < row.size(); ++x) out[x] += row[x];
    }
    return out;
}

double mutual_info_pmf(const JointPmf& p_sx) {
    const auto ps = marginal_s(p_sx);
    const auto px = marginal_x(p_sx);
    double out = 0.0;
    for (size_t s = 0; s < p_sx.size(); ++s) {
        for (size_t x = 0; x < px.size(); ++x) {
            const double p = p_sx[s][x];
            if (p > 0) {
                out += p * std::log2(p / (ps[s] * px[x]));
            }
        }
    }
    return out;
}

namespace {

void validate_joint(const JointPmf& p_sx) {
    if (p_sx.empty() || p_sx.front().empty()) {
        throw InvalidArgument("joint pmf is empty");
    }
    double total = 0.0;
    for (const auto& row : p_sx) {
        if (row.size() != p_sx.front().size()) {
            throw InvalidArgument("joint pmf rows have unequal length");
        }
        for (double p : row) {
            if (!(p >= 0.0)) {
                throw InvalidArgument("joint pmf has a negative entry");
            }
            total += p;
        }
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidArgument("joint pmf sums to " + std::to_string(total));
    }
}

}  // namespace

double joint_typical_prob(const JointPmf& p_sx, const std::vector<int>& s_counts, int n, double delta) {
    validate_joint(p_sx);
    const auto px = marginal_x(p_sx);
    const int nx = static_cast<int>(px.size());
    double log_prob = 0.0;
    for (size_t s = 0; s < p_sx.size(); ++s) {
        std::vector<int> lo(nx), hi(nx);
        for (int x = 0; x < nx; ++x) {
            const double p = p_sx[s][x];
            if (p <= 0.0) {
                lo[x] = hi[x] = 0;
            } else {
                lo[x] = std::max(0, static_cast<int>(std::ceil(n * (p - delta) - 1e-9)));
                hi[x] = static_cast<int>(std::floor(n * (p + delta) + 1e-9));
            }
        }
        double sum = 0.0;
        for_each_composition(s_counts[s], lo, hi, [&](const std::vector<int>& c) {
            double lw = log_multinomial_e(s_counts[s], c);
            for (int x = 0; x < nx; ++x) {
                if (c[x] == 0) continue;
                if (px[x] <= 0.0) return;
                lw += c[x] * std::log(px[x]);
            }
            // Exact boundary check on the rounded box.
            for (int x = 0; x < nx; ++x) {
                if (p_sx[s][x] > 0.0 && !within(double(c[x]) / n, p_sx[s][x], delta)) return;
            }
            sum += std::exp(lw);
        });
        if (sum <= 0.0) {
            return 0.0;
        }
        log_prob += std::log(sum);
    }
    return std::min(1.0, std::exp(log_prob));
}

CoveringResult covering_monte_carlo(const JointPmf& p_sx, double rate, int n, double delta, long trials,
                                    uint64_t seed) {
    validate_joint(p_sx);
    if (!(rate > 0.0)) {
        throw InvalidArgument("covering_monte_carlo: rate must be positive");
    }
    if (trials < 1 || n < 1) {
        throw InvalidArgument("covering_monte_carlo: need trials >= 1 and n >= 1");
    }
    const auto ps = marginal_s(p_sx);
    const auto px = marginal_x(p_sx);
    const long k = static_cast<long>(std::ceil(n * rate - 1e-12));
    CoveringResult out;
    out.trials = trials;
    out.log2_codewords = static_cast<double>(k);
    out.explicit_codewords = k <= 12;

    const SeedStream stream(seed);
    Rng rng = stream.rng("monte-carlo");
    std::discrete_distribution<int> draw_s(ps.begin(), ps.end());
    std::discrete_distribution<int> draw_x(px.begin(), px.end());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::map<std::vector<int>, double> cache;

    for (long t = 0; t < trials; ++t) {
        std::vector<int> sn(n);
        std::vector<int> counts(ps.size(), 0);
        for (int i = 0; i < n; ++i) {
            sn[i] = draw_s(rng);
            ++counts[sn[i]];
        }
        bool failed = true;
        if (out.explicit_codewords) {
            const long codewords = 1L << k;
            std::vector<int> xn(n);
            for (long m = 0; m < codewords && failed; ++m) {
                for (int i = 0; i < n; ++i) xn[i] = draw_x(rng);
                failed = !is_jointly_typical(sn, xn, p_sx, delta);
            }
        } else {
            auto it = cache.find(counts);
            if (it == cache.end()) {
                const double p = joint_typical_prob(p_sx, counts, n, delta);
                double f;
                if (p <= 0.0) {
                    f = 1.0;
                } else if (p >= 1.0) {
                    f = 0.0;
                } else {
                    // (1-p)^(2^k) in the log domain.
                    const double log_f = -std::exp(k * std::log(2.0) + std::log(-std::log1p(-p)));
                    f = std::exp(log_f);
                }
                it = cache.emplace(counts, f).first;
            }
            failed = unif(rng) < it->second;
        }
        out.failures += failed ? 1 : 0;
    }
    out.fail_prob_hat = static_cast<double>(out.failures) / trials;
    out.stderr_ = std::sqrt(out.fail_prob_hat * (1.0 - out.fail_prob_hat) / trials);
    return out;
}

}  // namespace eacsi
