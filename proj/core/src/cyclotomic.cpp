#include "qmetro/cyclotomic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qmetro {

namespace {

// Exact division of polynomials over Z: numerator /= divisor (monic leading
// coefficient +-1 in our usage). Throws if the division leaves a remainder.
std::vector<BigInt> poly_divide_exact(std::vector<BigInt> num,
                                      const std::vector<BigInt>& div) {
    const auto nd = static_cast<long>(num.size()) - 1;
    const auto dd = static_cast<long>(div.size()) - 1;
    if (nd < dd) throw std::logic_error("poly_divide_exact: degree underflow");
    std::vector<BigInt> quot(static_cast<std::size_t>(nd - dd + 1));
    for (long k = nd - dd; k >= 0; --k) {
        BigInt q = num[static_cast<std::size_t>(k + dd)] / div[static_cast<std::size_t>(dd)];
        quot[static_cast<std::size_t>(k)] = q;
        for (long i = 0; i <= dd; ++i) {
            num[static_cast<std::size_t>(k + i)] -= q * div[static_cast<std::size_t>(i)];
        }
    }
    for (const auto& r : num) {
        if (r != 0) throw std::logic_error("poly_divide_exact: nonzero remainder");
    }
    return quot;
}

} // namespace

std::vector<BigInt> cyclotomic_polynomial(int n) {
    if (n < 1) throw std::invalid_argument("cyclotomic_polynomial: n must be >= 1");
    // Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d.
    std::vector<BigInt> poly(static_cast<std::size_t>(n) + 1, BigInt(0));
    poly.front() = -1;
    poly.back() = 1;
    for (int d = 1; d < n; ++d) {
        if (n % d == 0) {
            poly = poly_divide_exact(std::move(poly), cyclotomic_polynomial(d));
        }
    }
    return poly;
}

Cyclotomic::Cyclotomic(int order) : order_(order), c_(static_cast<std::size_t>(order), BigInt(0)) {
    if (order < 1) throw std::invalid_argument("Cyclotomic: order must be >= 1");
}

Cyclotomic Cyclotomic::root_power(int order, long long power) {
    Cyclotomic z(order);
    z.add_root_power(power, BigInt(1));
    return z;
}

Cyclotomic Cyclotomic::integer(int order, BigInt value) {
    Cyclotomic z(order);
    z.c_[0] = std::move(value);
    return z;
}

Cyclotomic& Cyclotomic::operator+=(const Cyclotomic& other) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += other.c_[i];
    return *this;
}

Cyclotomic& Cyclotomic::operator-=(const Cyclotomic& other) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= other.c_[i];
    return *this;
}

Cyclotomic Cyclotomic::operator*(const Cyclotomic& other) const {
    Cyclotomic out(order_);
    const auto n = static_cast<std::size_t>(order_);
    for (std::size_t i = 0; i < n; ++i) {
        if (c_[i] == 0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (other.c_[j] == 0) continue;
            out.c_[(i + j) % n] += c_[i] * other.c_[j];
        }
    }
    return out;
}

Cyclotomic& Cyclotomic::operator*=(const BigInt& scale) {
    for (auto& v : c_) v *= scale;
    return *this;
}

Cyclotomic Cyclotomic::operator-() const {
    Cyclotomic out(order_);
    for (std::size_t i = 0; i < c_.size(); ++i) out.c_[i] = -c_[i];
    return out;
}

void Cyclotomic::add_root_power(long long power, const BigInt& scale) {
    long long r = power % order_;
    if (r < 0) r += order_;
    c_[static_cast<std::size_t>(r)] += scale;
}

Cyclotomic Cyclotomic::conjugate() const {
    Cyclotomic out(order_);
    for (int k = 0; k < order_; ++k) {
        const int neg = (order_ - k) % order_;
        out.c_[static_cast<std::size_t>(neg)] = c_[static_cast<std::size_t>(k)];
    }
    return out;
}

std::vector<BigInt> Cyclotomic::reduced() const {
    std::vector<BigInt> rem = c_;
    static thread_local std::vector<std::pair<int, std::vector<BigInt>>> cache;
    const std::vector<BigInt>* phi = nullptr;
    for (const auto& [ord, poly] : cache) {
        if (ord == order_) phi = &poly;
    }
    if (phi == nullptr) {
        cache.emplace_back(order_, cyclotomic_polynomial(order_));
        phi = &cache.back().second;
    }
    const auto deg = static_cast<long>(phi->size()) - 1;
    for (long k = static_cast<long>(rem.size()) - 1; k >= deg; --k) {
        BigInt lead = rem[static_cast<std::size_t>(k)];
        if (lead == 0) continue;
        rem[static_cast<std::size_t>(k)] = 0;
        for (long i = 0; i < deg; ++i) {
            rem[static_cast<std::size_t>(k - deg + i)] -= lead * (*phi)[static_cast<std::size_t>(i)];
        }
    }
    rem.resize(static_cast<std::size_t>(deg));
    return rem;
}

bool Cyclotomic::is_zero() const {
    bool plain_zero = true;
    for (const auto& v : c_) {
        if (v != 0) {
            plain_zero = false;
            break;
        }
    }
    if (plain_zero) return true;
    for (const auto& v : reduced()) {
        if (v != 0) return false;
    }
    return true;
}

std::optional<BigInt> Cyclotomic::as_integer() const {
    std::vector<BigInt> rem = reduced();
    for (std::size_t i = 1; i < rem.size(); ++i) {
        if (rem[i] != 0) return std::nullopt;
    }
    return rem.empty() ? BigInt(0) : rem[0];
}

std::complex<double> Cyclotomic::to_complex() const {
    std::complex<double> out(0.0, 0.0);
    for (int k = 0; k < order_; ++k) {
        if (c_[static_cast<std::size_t>(k)] == 0) continue;
        const double angle = 2.0 * std::numbers::pi * k / order_;
        out += c_[static_cast<std::size_t>(k)].convert_to<double>() *
               std::complex<double>(std::cos(angle), std::sin(angle));
    }
    return out;
}

ExactReal::ExactReal(Cyclotomic numerator, BigInt denominator)
    : numerator_(std::move(numerator)), denominator_(std::move(denominator)) {
    if (denominator_ <= 0) throw std::invalid_argument("ExactReal: denominator must be positive");
}

ExactReal& ExactReal::operator+=(const ExactReal& other) {
    if (denominator_ == other.denominator_) {
        numerator_ += other.numerator_;
        return *this;
    }
    const BigInt g = boost::multiprecision::gcd(denominator_, other.denominator_);
    const BigInt l = denominator_ / g * other.denominator_;
    numerator_ *= (l / denominator_);
    Cyclotomic scaled = other.numerator_;
    scaled *= (l / other.denominator_);
    numerator_ += scaled;
    denominator_ = l;
    return *this;
}

std::optional<Rational> ExactReal::as_rational() const {
    const auto num = numerator_.as_integer();
    if (!num) return std::nullopt;
    return Rational(*num, denominator_);
}

double ExactReal::to_double() const {
    return numerator_.to_complex().real() / denominator_.convert_to<double>();
}

} // namespace qmetro
