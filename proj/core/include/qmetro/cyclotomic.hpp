#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <optional>
#include <vector>

namespace qmetro {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Integer coefficients (ascending degree) of the n-th cyclotomic polynomial.
std::vector<BigInt> cyclotomic_polynomial(int n);

/// Element of Z[omega], omega = exp(2*pi*i/order), stored as integer
/// coefficients of omega^0 .. omega^(order-1). Products are cyclic
/// convolutions; an element is zero iff its coefficient polynomial is
/// divisible by the order-th cyclotomic polynomial.
class Cyclotomic {
public:
    explicit Cyclotomic(int order);
    static Cyclotomic root_power(int order, long long power);
    static Cyclotomic integer(int order, BigInt value);

    int order() const { return order_; }
    const std::vector<BigInt>& coefficients() const { return c_; }

    Cyclotomic& operator+=(const Cyclotomic& other);
    Cyclotomic& operator-=(const Cyclotomic& other);
    Cyclotomic operator*(const Cyclotomic& other) const;
    Cyclotomic& operator*=(const BigInt& scale);
    Cyclotomic operator-() const;

    /// this += scale * omega^power.
    void add_root_power(long long power, const BigInt& scale);

    /// omega -> omega^(-1).
    Cyclotomic conjugate() const;

    bool is_zero() const;

    /// The integer value if the element lies in Z, nullopt otherwise.
    std::optional<BigInt> as_integer() const;

    std::complex<double> to_complex() const;

private:
    int order_;
    std::vector<BigInt> c_;

    std::vector<BigInt> reduced() const;
};

/// Nonnegative real number num / den with a cyclotomic-integer numerator;
/// the natural carrier for probability masses accumulated from exact
/// interference amplitudes.
class ExactReal {
public:
    ExactReal(Cyclotomic numerator, BigInt denominator);

    static ExactReal zero(int order) { return {Cyclotomic(order), BigInt(1)}; }

    ExactReal& operator+=(const ExactReal& other);

    bool is_zero() const { return numerator_.is_zero(); }

    /// Exact rational value when the numerator is rational, nullopt otherwise.
    std::optional<Rational> as_rational() const;

    double to_double() const;

    const Cyclotomic& numerator() const { return numerator_; }
    const BigInt& denominator() const { return denominator_; }

private:
    Cyclotomic numerator_;
    BigInt denominator_;
};

} // namespace qmetro
