#pragma once

#include <optional>

#include "netcode/linalg.hpp"

namespace netcode {

// Linear subspace of F^n held as a reduced-row-echelon basis with ascending
// pivot columns. The representation is canonical: equal subspaces compare
// equal member-wise.
class Subspace {
public:
    Subspace() = default;
    Subspace(Field f, std::size_t n) : field_(std::move(f)), n_(n) {} // zero space
    static Subspace span(Field f, std::size_t n, const std::vector<FVector>& gens);
    static Subspace full(Field f, std::size_t n);

    const Field& field() const { return field_; }
    std::size_t ambient_dim() const { return n_; }
    std::size_t dim() const { return basis_.size(); }
    const std::vector<FVector>& basis() const { return basis_; }
    const std::vector<std::size_t>& pivots() const { return pivots_; }

    bool contains(const FVector& v) const { return reduce(v).is_zero(); }

    // Subtracts the projection onto the span, zeroing every pivot coordinate.
    // The result is the canonical representative of v's coset.
    FVector reduce(FVector v) const;

    // q^dim, saturating at uint64 max.
    std::uint64_t count() const;
    std::vector<FVector> enumerate(std::uint64_t guard) const;

    friend bool operator==(const Subspace& a, const Subspace& b) {
        return a.n_ == b.n_ && a.basis_ == b.basis_;
    }
    friend bool operator!=(const Subspace& a, const Subspace& b) { return !(a == b); }

private:
    Field field_;
    std::size_t n_ = 0;
    std::vector<FVector> basis_;
    std::vector<std::size_t> pivots_;
};

Subspace sum(const Subspace& a, const Subspace& b);
Subspace intersect(const Subspace& a, const Subspace& b); // Zassenhaus

// Affine subspace rep + space. The representative is canonicalized by
// reducing modulo the space, so cosets also compare member-wise.
class Coset {
public:
    Coset() = default;
    Coset(FVector rep, Subspace space);
    static Coset point(FVector v);
    static Coset full(Field f, std::size_t n);

    const Field& field() const { return space_.field(); }
    std::size_t ambient_dim() const { return space_.ambient_dim(); }
    std::size_t dim() const { return space_.dim(); }
    const FVector& rep() const { return rep_; }
    const Subspace& space() const { return space_; }

    bool contains(const FVector& v) const { return space_.reduce(v) == rep_; }
    std::uint64_t count() const { return space_.count(); }
    std::vector<FVector> enumerate(std::uint64_t guard) const;

    friend bool operator==(const Coset& a, const Coset& b) {
        return a.rep_ == b.rep_ && a.space_ == b.space_;
    }
    friend bool operator!=(const Coset& a, const Coset& b) { return !(a == b); }

private:
    FVector rep_;
    Subspace space_;
};

// Empty intersection comes back as nullopt.
std::optional<Coset> coset_intersect(const Coset& a, const Coset& b);

// Smallest coset containing all given points (affine hull).
Coset affine_hull(Field f, std::size_t n, const std::vector<FVector>& points);

} // namespace netcode
