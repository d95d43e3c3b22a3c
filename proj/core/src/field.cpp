#include "netcode/field.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace netcode {

namespace {

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Dense polynomial over GF(p), coefficients constant-first. Trailing zeros
// allowed; degree() is the last nonzero index.
using Poly = std::vector<std::uint32_t>;

int degree(const Poly& a) {
    for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i)
        if (a[i] != 0) return i;
    return -1;
}

Poly poly_mul(const Poly& a, const Poly& b, std::uint32_t p) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] = static_cast<std::uint32_t>((r[i + j] + std::uint64_t(a[i]) * b[j]) % p);
    }
    return r;
}

std::uint32_t int_inv_mod(std::uint32_t a, std::uint32_t p) {
    // Extended Euclid on integers.
    std::int64_t t = 0, newt = 1, r = p, newr = a % p;
    while (newr != 0) {
        std::int64_t qq = r / newr;
        std::int64_t tmp = t - qq * newt;
        t = newt;
        newt = tmp;
        tmp = r - qq * newr;
        r = newr;
        newr = tmp;
    }
    if (r != 1) throw std::logic_error("element not invertible");
    if (t < 0) t += p;
    return static_cast<std::uint32_t>(t);
}

// a mod b, b nonzero, in place styles avoided for clarity.
Poly poly_mod(Poly a, const Poly& b, std::uint32_t p) {
    int db = degree(b);
    std::uint32_t lead_inv = int_inv_mod(b[db], p);
    for (int da = degree(a); da >= db; da = degree(a)) {
        std::uint32_t f = static_cast<std::uint32_t>((std::uint64_t(a[da]) * lead_inv) % p);
        int shift = da - db;
        for (int i = 0; i <= db; ++i) {
            std::uint64_t sub = (std::uint64_t(f) * b[i]) % p;
            a[i + shift] = static_cast<std::uint32_t>((a[i + shift] + p - sub) % p);
        }
    }
    return a;
}

bool poly_is_zero(const Poly& a) { return degree(a) < 0; }

// Irreducibility over GF(p) by trial division with every monic polynomial of
// degree 1..deg/2.
bool is_irreducible(const Poly& poly, std::uint32_t p) {
    int dp = degree(poly);
    if (dp < 1) return false;
    for (int d = 1; 2 * d <= dp; ++d) {
        std::uint64_t count = 1;
        for (int i = 0; i < d; ++i) count *= p;
        for (std::uint64_t t = 0; t < count; ++t) {
            Poly div(d + 1, 0);
            std::uint64_t v = t;
            for (int i = 0; i < d; ++i) {
                div[i] = static_cast<std::uint32_t>(v % p);
                v /= p;
            }
            div[d] = 1;
            if (poly_is_zero(poly_mod(poly, div, p))) return false;
        }
    }
    return true;
}

// Default modulus: the first irreducible monic polynomial of degree m over
// GF(p) in lexicographic order of the low coefficients. Fixed so that
// serialized fields mean the same thing in every run.
Poly default_modulus(std::uint32_t p, std::uint32_t m) {
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < m; ++i) count *= p;
    for (std::uint64_t t = 0; t < count; ++t) {
        Poly cand(m + 1, 0);
        std::uint64_t v = t;
        for (std::uint32_t i = 0; i < m; ++i) {
            cand[i] = static_cast<std::uint32_t>(v % p);
            v /= p;
        }
        cand[m] = 1;
        if (is_irreducible(cand, p)) return cand;
    }
    throw std::logic_error("no irreducible polynomial found");
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
    std::vector<std::uint64_t> fs;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            fs.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) fs.push_back(n);
    return fs;
}

} // namespace

FieldSpec::FieldSpec(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> modulus)
    : p_(p), m_(m), modulus_(std::move(modulus)) {
    if (!is_prime(p_)) throw UsageError("field characteristic must be prime, got " + std::to_string(p_));
    if (m_ < 1) throw UsageError("extension degree must be >= 1");
    q_ = 1;
    for (std::uint32_t i = 0; i < m_; ++i) {
        q_ *= p_;
        if (m_ >= 2 && q_ > 65536) throw UsageError("extension fields limited to q <= 2^16");
        if (q_ > (std::uint64_t(1) << 31)) throw UsageError("field too large");
    }
    if (m_ == 1) {
        modulus_.clear();
        return;
    }

    if (modulus_.empty()) {
        modulus_ = default_modulus(p_, m_);
    } else {
        default_modulus_ = modulus_ == default_modulus(p_, m_);
    }
    if (modulus_.size() != m_ + 1)
        throw UsageError("modulus must have degree m (m+1 coefficients)");
    if (modulus_[m_] != 1) throw UsageError("modulus must be monic");
    for (auto c : modulus_)
        if (c >= p_) throw UsageError("modulus coefficient out of range");
    if (!is_irreducible(modulus_, p_)) throw UsageError("modulus is not irreducible");

    // Multiplicative group is cyclic; find a generator and tabulate powers.
    auto to_poly = [&](std::uint32_t r) {
        Poly a(m_, 0);
        for (std::uint32_t i = 0; i < m_; ++i) {
            a[i] = r % p_;
            r /= p_;
        }
        return a;
    };
    auto from_poly = [&](const Poly& a) {
        std::uint64_t r = 0;
        for (int i = static_cast<int>(std::min<std::size_t>(a.size(), m_)) - 1; i >= 0; --i)
            r = r * p_ + a[i];
        return static_cast<std::uint32_t>(r);
    };
    auto mulmod = [&](std::uint32_t a, std::uint32_t b) {
        return from_poly(poly_mod(poly_mul(to_poly(a), to_poly(b), p_), modulus_, p_));
    };
    auto powmod = [&](std::uint32_t a, std::uint64_t e) {
        std::uint32_t r = 1;
        while (e) {
            if (e & 1) r = mulmod(r, a);
            a = mulmod(a, a);
            e >>= 1;
        }
        return r;
    };

    const std::uint64_t order = q_ - 1;
    const auto factors = prime_factors(order);
    std::uint32_t gen = 0;
    for (std::uint32_t g = 2; g < q_; ++g) {
        bool ok = true;
        for (auto r : factors) {
            if (powmod(g, order / r) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) {
            gen = g;
            break;
        }
    }
    if (gen == 0) throw std::logic_error("no generator found");

    exp_.resize(order);
    log_.assign(q_, 0);
    std::uint32_t cur = 1;
    for (std::uint64_t i = 0; i < order; ++i) {
        exp_[i] = cur;
        log_[cur] = static_cast<std::uint32_t>(i);
        cur = mulmod(cur, gen);
    }
}

Field FieldSpec::make(std::uint32_t p, std::uint32_t m) {
    return Field(new FieldSpec(p, m, {}));
}

Field FieldSpec::make(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> modulus) {
    return Field(new FieldSpec(p, m, std::move(modulus)));
}

Field FieldSpec::make_order(std::uint64_t q) {
    if (q < 2) throw UsageError("field order must be >= 2");
    std::uint64_t p = 2;
    while (q % p != 0) {
        ++p;
        if (p * p > q) {
            p = q;
            break;
        }
    }
    std::uint32_t m = 0;
    std::uint64_t v = q;
    while (v > 1) {
        if (v % p != 0) throw UsageError(std::to_string(q) + " is not a prime power");
        v /= p;
        ++m;
    }
    return make(static_cast<std::uint32_t>(p), m);
}

std::uint32_t FieldSpec::add(std::uint32_t a, std::uint32_t b) const {
    counters::count_add();
    if (m_ == 1) return static_cast<std::uint32_t>((std::uint64_t(a) + b) % p_);
    if (p_ == 2) return a ^ b;
    std::uint32_t r = 0, mult = 1;
    for (std::uint32_t i = 0; i < m_; ++i) {
        r += ((a % p_ + b % p_) % p_) * mult;
        a /= p_;
        b /= p_;
        mult *= p_;
    }
    return r;
}

std::uint32_t FieldSpec::neg(std::uint32_t a) const {
    counters::count_add();
    if (m_ == 1) return a == 0 ? 0 : p_ - a;
    if (p_ == 2) return a;
    std::uint32_t r = 0, mult = 1;
    for (std::uint32_t i = 0; i < m_; ++i) {
        std::uint32_t d = a % p_;
        r += (d == 0 ? 0 : p_ - d) * mult;
        a /= p_;
        mult *= p_;
    }
    return r;
}

std::uint32_t FieldSpec::sub(std::uint32_t a, std::uint32_t b) const {
    counters::count_add();
    if (m_ == 1) return static_cast<std::uint32_t>((std::uint64_t(a) + p_ - b) % p_);
    if (p_ == 2) return a ^ b;
    std::uint32_t r = 0, mult = 1;
    for (std::uint32_t i = 0; i < m_; ++i) {
        r += ((a % p_ + p_ - b % p_) % p_) * mult;
        a /= p_;
        b /= p_;
        mult *= p_;
    }
    return r;
}

std::uint32_t FieldSpec::mul_nocount(std::uint32_t a, std::uint32_t b) const {
    if (a == 0 || b == 0) return 0;
    if (m_ == 1) return static_cast<std::uint32_t>((std::uint64_t(a) * b) % p_);
    std::uint64_t s = std::uint64_t(log_[a]) + log_[b];
    const std::uint64_t order = q_ - 1;
    if (s >= order) s -= order;
    return exp_[s];
}

std::uint32_t FieldSpec::mul(std::uint32_t a, std::uint32_t b) const {
    counters::count_mul();
    return mul_nocount(a, b);
}

std::uint32_t FieldSpec::inv(std::uint32_t a) const {
    if (a == 0) throw std::domain_error("inverse of zero in " + to_string());
    counters::count_mul();
    if (m_ == 1) return int_inv_mod(a, p_);
    const std::uint64_t order = q_ - 1;
    std::uint32_t l = log_[a];
    return exp_[(order - l) % order];
}

std::uint32_t FieldSpec::div(std::uint32_t a, std::uint32_t b) const {
    return mul(a, inv(b));
}

std::string FieldSpec::to_string() const {
    std::ostringstream os;
    os << "GF(" << q_;
    if (m_ >= 2 && !default_modulus_) {
        os << ':';
        for (std::size_t i = 0; i < modulus_.size(); ++i) {
            if (i) os << ',';
            os << modulus_[i];
        }
    }
    os << ')';
    return os.str();
}

Field FieldSpec::parse(std::string_view text) {
    auto fail = [&]() -> Field {
        throw UsageError("bad field spec '" + std::string(text) + "', expected GF(q), GF(p^m) or GF(q:c0,...,cm)");
    };
    std::string_view s = text;
    if (s.size() < 5 || s.substr(0, 3) != "GF(" || s.back() != ')') return fail();
    s = s.substr(3, s.size() - 4);

    std::string_view base = s, coeffs;
    if (auto colon = s.find(':'); colon != std::string_view::npos) {
        base = s.substr(0, colon);
        coeffs = s.substr(colon + 1);
    }

    auto parse_int = [&](std::string_view v) -> std::uint64_t {
        std::uint64_t out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) fail();
        return out;
    };

    std::uint64_t p, m;
    if (auto caret = base.find('^'); caret != std::string_view::npos) {
        p = parse_int(base.substr(0, caret));
        m = parse_int(base.substr(caret + 1));
        if (m == 0 || m > 32) fail();
    } else {
        std::uint64_t q = parse_int(base);
        if (q < 2) fail();
        std::uint64_t d = 2;
        while (q % d != 0) {
            ++d;
            if (d * d > q) {
                d = q;
                break;
            }
        }
        p = d;
        m = 0;
        std::uint64_t v = q;
        while (v > 1) {
            if (v % p != 0) fail();
            v /= p;
            ++m;
        }
    }

    std::vector<std::uint32_t> modulus;
    if (!coeffs.empty()) {
        std::size_t pos = 0;
        while (pos <= coeffs.size()) {
            auto next = coeffs.find(',', pos);
            auto tok = coeffs.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
            modulus.push_back(static_cast<std::uint32_t>(parse_int(tok)));
            if (next == std::string_view::npos) break;
            pos = next + 1;
        }
        if (modulus.size() != m + 1)
            throw UsageError("modulus has " + std::to_string(modulus.size()) + " coefficients, expected " +
                             std::to_string(m + 1));
    }
    return make(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(m), std::move(modulus));
}

} // namespace netcode
