#include "pooledcs/pooling.hpp"

#include "pooledcs/error.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace pooledcs {

namespace {

void require_probability(double q, const char* where) {
    if (!(q > 0.0 && q < 1.0)) {
        std::ostringstream msg;
        msg << where << ": q must lie in (0, 1), got " << q;
        throw ParameterError(msg.str());
    }
}

double surrogate_scale(Index n, double q) {
    return std::sqrt(static_cast<double>(n) * q * (1.0 - q));
}

}  // namespace

PoolingMatrix::PoolingMatrix(Matrix membership, double q) : a_(std::move(membership)), q_(q) {
    require_probability(q_, "PoolingMatrix");
    if (a_.rows() == 0 || a_.cols() == 0) {
        throw ParameterError("PoolingMatrix: matrix is empty");
    }
    for (Index j = 0; j < a_.cols(); ++j) {
        for (Index i = 0; i < a_.rows(); ++i) {
            const double v = a_(i, j);
            if (v != 0.0 && v != 1.0) {
                std::ostringstream msg;
                msg << "PoolingMatrix: entry (" << i << ", " << j << ") = " << v << " is not binary";
                throw ParameterError(msg.str());
            }
        }
    }
}

std::string PoolingDiagnostics::describe() const {
    std::ostringstream out;
    for (Index l : empty_pools) {
        out << "pool " << l << " is empty\n";
    }
    for (Index k : undercovered_samples) {
        out << "sample " << k << " appears in fewer than 2 pools\n";
    }
    return out.str();
}

PoolingMatrix generate_pooling_matrix(Index n, Index p, double q, RngStream& stream) {
    if (n < 2 || p < 2 || n >= p) {
        std::ostringstream msg;
        msg << "generate_pooling_matrix: need 2 <= n < p, got n=" << n << " p=" << p;
        throw ParameterError(msg.str());
    }
    require_probability(q, "generate_pooling_matrix");
    Matrix a(n, p);
    // Row-major draw order so the stream layout matches the text format.
    for (Index l = 0; l < n; ++l) {
        for (Index k = 0; k < p; ++k) {
            a(l, k) = stream.uniform() < q ? 1.0 : 0.0;
        }
    }
    return PoolingMatrix(std::move(a), q);
}

Matrix surrogate_matrix(const PoolingMatrix& a) {
    const double scale = surrogate_scale(a.pools(), a.q());
    return (a.membership().array() - a.q()).matrix() / scale;
}

Vector surrogate_measurements(const Vector& y, Index n, double q) {
    if (n < 2 || y.size() != n) {
        std::ostringstream msg;
        msg << "surrogate_measurements: need n = |y| >= 2, got n=" << n << " |y|=" << y.size();
        throw ParameterError(msg.str());
    }
    require_probability(q, "surrogate_measurements");
    const double total = y.sum();
    const double denom = static_cast<double>(n - 1) * surrogate_scale(n, q);
    return ((static_cast<double>(n) * y).array() - total).matrix() / denom;
}

SurrogateSystem make_surrogate(const PoolingMatrix& a, const Vector& y) {
    return SurrogateSystem{surrogate_matrix(a), surrogate_measurements(y, a.pools(), a.q()), a.q()};
}

RecParams rec_parameters(Index n, Index p, double q, double c_rec) {
    if (p < 2 || n < 1 || !(c_rec > 0.0)) {
        throw ParameterError("rec_parameters: need p >= 2, n >= 1, c_rec > 0");
    }
    require_probability(q, "rec_parameters");
    RecParams rec;
    rec.c_rec = c_rec;
    rec.kappa1 = c_rec / (q * (1.0 - q)) *
                 std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
    rec.kappa2 = 0.25;
    return rec;
}

PoolingDiagnostics validate_pooling(const PoolingMatrix& a) {
    PoolingDiagnostics report;
    const Matrix& m = a.membership();
    for (Index l = 0; l < m.rows(); ++l) {
        if (m.row(l).sum() == 0.0) {
            report.empty_pools.push_back(l);
        }
    }
    for (Index k = 0; k < m.cols(); ++k) {
        if (m.col(k).sum() < 2.0) {
            report.undercovered_samples.push_back(k);
        }
    }
    return report;
}

void write_pooling_matrix(std::ostream& out, const PoolingMatrix& a) {
    const Matrix& m = a.membership();
    out.precision(std::numeric_limits<double>::max_digits10);
    out << m.rows() << ' ' << m.cols() << ' ' << a.q() << '\n';
    for (Index l = 0; l < m.rows(); ++l) {
        for (Index k = 0; k < m.cols(); ++k) {
            if (k > 0) {
                out << ' ';
            }
            out << (m(l, k) != 0.0 ? '1' : '0');
        }
        out << '\n';
    }
}

PoolingMatrix read_pooling_matrix(std::istream& in) {
    long long n = 0;
    long long p = 0;
    double q = 0.0;
    if (!(in >> n >> p >> q) || n <= 0 || p <= 0) {
        throw IoError("pooling matrix: malformed header, expected \"n p q\"");
    }
    Matrix m(n, p);
    for (Index l = 0; l < n; ++l) {
        for (Index k = 0; k < p; ++k) {
            int digit = -1;
            if (!(in >> digit) || (digit != 0 && digit != 1)) {
                std::ostringstream msg;
                msg << "pooling matrix: expected 0/1 at row " << l << " column " << k;
                throw IoError(msg.str());
            }
            m(l, k) = digit;
        }
    }
    std::string trailing;
    if (in >> trailing) {
        throw IoError("pooling matrix: unexpected trailing data \"" + trailing + "\"");
    }
    return PoolingMatrix(std::move(m), q);
}

}  // namespace pooledcs
