#include "pooledcs/numerics.hpp"

#include "pooledcs/error.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace pooledcs {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path)
    : seed_(master_seed), path_(path) {
    seed_state();
}

RngStream::RngStream(std::uint64_t master_seed, const std::vector<std::uint64_t>& path)
    : seed_(master_seed), path_(path) {
    seed_state();
}

void RngStream::seed_state() {
    // Fold the path into a key; each level is hashed so that (a, b) and
    // (b, a) land on unrelated keys.
    std::uint64_t key = splitmix64(seed_);
    for (std::uint64_t label : path_) {
        key = splitmix64(key ^ splitmix64(label + 0x632be59bd9b4e019ULL));
    }
    std::uint64_t s = key;
    for (auto& word : state_) {
        s = splitmix64(s);
        word = s;
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
        state_[0] = 1;
    }
    normal_.reset();
}

RngStream RngStream::derive(std::uint64_t label) const {
    std::vector<std::uint64_t> child = path_;
    child.push_back(label);
    return RngStream(seed_, child);
}

RngStream::result_type RngStream::operator()() {
    // xoshiro256**
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double RngStream::standard_normal() {
    return normal_(*this);
}

int sample_bernoulli(RngStream& stream, double q) {
    if (!(q > 0.0 && q < 1.0)) {
        std::ostringstream msg;
        msg << "bernoulli probability must lie in (0, 1), got " << q;
        throw ParameterError(msg.str());
    }
    return stream.uniform() < q ? 1 : 0;
}

double sample_standard_normal(RngStream& stream) {
    return stream.standard_normal();
}

std::uint64_t label_of(double value) noexcept {
    return value == 0.0 ? 0 : std::bit_cast<std::uint64_t>(value);  // -0 and +0 agree
}

double spectral_norm_sq(const Matrix& m, double tol, int max_iter) {
    if (m.rows() == 0 || m.cols() == 0) {
        throw ParameterError("spectral_norm_sq: matrix is empty");
    }
    if (!(tol > 0.0)) {
        throw ParameterError("spectral_norm_sq: tolerance must be positive");
    }

    Vector v = Vector::Constant(m.cols(), 1.0 / std::sqrt(static_cast<double>(m.cols())));
    double estimate = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        const Vector w = m.transpose() * (m * v);
        const double rayleigh = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) {
            return 0.0;
        }
        v = w / norm;
        if (iter > 0 && std::abs(rayleigh - estimate) <= tol * std::abs(rayleigh)) {
            return rayleigh;
        }
        estimate = rayleigh;
    }
    throw ConvergenceError("spectral_norm_sq: power iteration did not converge", estimate);
}

}  // namespace pooledcs
