#ifndef NETCODE_FIELD_HPP
#define NETCODE_FIELD_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "netcode/counters.hpp"
#include "netcode/errors.hpp"

namespace netcode {

class FieldSpec;

/// Shared handle to an immutable field description.
using Field = std::shared_ptr<const FieldSpec>;

/// A finite field GF(p^m). Elements are canonical integers in [0, q) that
/// encode the polynomial coefficient vector in base p (least significant
/// digit = constant term). For m >= 2 the spec carries the monic irreducible
/// modulus, given constant-first, and precomputes log/antilog tables
/// (supported up to q = 2^16; larger extension fields are rejected).
///
/// All raw-repr arithmetic below feeds the active OpCounters scope.
class FieldSpec {
  public:
    /// Field with the built-in default modulus for (p, m).
    static Field make(std::uint32_t p, std::uint32_t m = 1);
    /// Field of order q = p^m, q a prime power, default modulus.
    static Field make_order(std::uint64_t q);
    /// Field with an explicit modulus (constant-first, length m + 1, monic).
    static Field make(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> modulus);

    /// Parses the textual form GF(q), GF(p^m) or GF(q:c0,c1,...,cm).
    static Field parse(std::string_view text);

    std::uint32_t p() const { return p_; }
    std::uint32_t m() const { return m_; }
    std::uint64_t q() const { return q_; }
    /// Modulus coefficients, constant-first (empty when m = 1).
    const std::vector<std::uint32_t>& modulus() const { return modulus_; }

    bool operator==(const FieldSpec& o) const {
        return p_ == o.p_ && m_ == o.m_ && modulus_ == o.modulus_;
    }
    bool operator!=(const FieldSpec& o) const { return !(*this == o); }

    /// "GF(q)" for the default modulus, "GF(q:c0,...,cm)" otherwise.
    std::string to_string() const;

    // Raw arithmetic on canonical representations.
    std::uint32_t add(std::uint32_t a, std::uint32_t b) const;
    std::uint32_t sub(std::uint32_t a, std::uint32_t b) const;
    std::uint32_t neg(std::uint32_t a) const;
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const;
    std::uint32_t inv(std::uint32_t a) const;
    std::uint32_t div(std::uint32_t a, std::uint32_t b) const;

  private:
    FieldSpec(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> modulus);

    std::uint32_t mul_nocount(std::uint32_t a, std::uint32_t b) const;

    std::uint32_t p_;
    std::uint32_t m_;
    std::uint64_t q_;
    std::vector<std::uint32_t> modulus_; // constant-first, monic, empty for m == 1
    bool default_modulus_ = true;
    // Discrete log tables for extension fields: exp_[i] = g^i, log_[exp_[i]] = i.
    std::vector<std::uint32_t> exp_;
    std::vector<std::uint32_t> log_;
};

/// Scalar in a specific field. Small value type; holds a non-owning pointer
/// to its FieldSpec, which must outlive the element.
class FieldElem {
  public:
    FieldElem() : spec_(nullptr), repr_(0) {}
    FieldElem(const FieldSpec* spec, std::uint32_t repr) : spec_(spec), repr_(repr) {}

    std::uint32_t repr() const { return repr_; }
    const FieldSpec* spec() const { return spec_; }
    bool is_zero() const { return repr_ == 0; }
    bool is_one() const { return repr_ == 1; }

    FieldElem inverse() const { return {spec_, spec_->inv(repr_)}; }

    friend FieldElem operator+(FieldElem a, FieldElem b) {
        check_same(a, b);
        return {a.spec_, a.spec_->add(a.repr_, b.repr_)};
    }
    friend FieldElem operator-(FieldElem a, FieldElem b) {
        check_same(a, b);
        return {a.spec_, a.spec_->sub(a.repr_, b.repr_)};
    }
    friend FieldElem operator*(FieldElem a, FieldElem b) {
        check_same(a, b);
        return {a.spec_, a.spec_->mul(a.repr_, b.repr_)};
    }
    friend FieldElem operator/(FieldElem a, FieldElem b) {
        check_same(a, b);
        return {a.spec_, a.spec_->div(a.repr_, b.repr_)};
    }
    FieldElem operator-() const { return {spec_, spec_->neg(repr_)}; }

    friend bool operator==(FieldElem a, FieldElem b) { return a.repr_ == b.repr_; }
    friend bool operator!=(FieldElem a, FieldElem b) { return a.repr_ != b.repr_; }

  private:
    static void check_same(FieldElem a, FieldElem b) {
        if (a.spec_ != b.spec_ && (!a.spec_ || !b.spec_ || *a.spec_ != *b.spec_))
            throw UsageError("field elements belong to different fields");
    }

    const FieldSpec* spec_;
    std::uint32_t repr_;
};

/// True when both handles describe the same field (by value).
inline bool same_field(const FieldSpec& a, const FieldSpec& b) { return a == b; }

} // namespace netcode

#endif
