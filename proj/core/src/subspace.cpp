#include "netcode/subspace.hpp"

namespace netcode {

Subspace Subspace::span(Field f, std::size_t n, const std::vector<FVector>& gens) {
    Subspace s(f, n);
    if (gens.empty()) return s;
    FMatrix A(f, gens.size(), n);
    for (std::size_t r = 0; r < gens.size(); ++r) {
        if (gens[r].size() != n) throw UsageError("generator has wrong dimension");
        A.set_row(r, gens[r]);
    }
    auto rr = rref(std::move(A));
    for (std::size_t r = 0; r < rr.rank; ++r) s.basis_.push_back(rr.R.row(r));
    s.pivots_ = std::move(rr.pivots);
    return s;
}

Subspace Subspace::full(Field f, std::size_t n) {
    Subspace s(f, n);
    for (std::size_t i = 0; i < n; ++i) {
        FVector e = FVector::zeros(s.field_, n);
        e[i] = 1;
        s.basis_.push_back(std::move(e));
        s.pivots_.push_back(i);
    }
    return s;
}

FVector Subspace::reduce(FVector v) const {
    if (v.size() != n_) throw UsageError("reduce: dimension mismatch");
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        std::uint32_t c = v[pivots_[i]];
        if (c) v.axpy(field_->neg(c), basis_[i]);
    }
    return v;
}

std::uint64_t Subspace::count() const {
    std::uint64_t c = 1;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (c > UINT64_MAX / field_->q()) return UINT64_MAX;
        c *= field_->q();
    }
    return c;
}

std::vector<FVector> Subspace::enumerate(std::uint64_t guard) const {
    std::uint64_t c = count();
    if (c > guard)
        throw CapacityError("subspace too large to enumerate (" + std::to_string(dim()) + " dims)");
    std::vector<FVector> out;
    out.reserve(c);
    for (std::uint64_t idx = 0; idx < c; ++idx) {
        FVector v = FVector::zeros(field_, n_);
        std::uint64_t t = idx;
        for (std::size_t i = 0; i < dim(); ++i) {
            auto coef = static_cast<std::uint32_t>(t % field_->q());
            t /= field_->q();
            v.axpy(coef, basis_[i]);
        }
        out.push_back(std::move(v));
    }
    return out;
}

Subspace sum(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim()) throw UsageError("sum: ambient dimension mismatch");
    std::vector<FVector> gens = a.basis();
    gens.insert(gens.end(), b.basis().begin(), b.basis().end());
    return Subspace::span(a.field() ? a.field() : b.field(), a.ambient_dim(), gens);
}

Subspace intersect(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim()) throw UsageError("intersect: ambient dimension mismatch");
    const std::size_t n = a.ambient_dim();
    const Field& f = a.field() ? a.field() : b.field();
    if (a.dim() == 0 || b.dim() == 0) return Subspace(f, n);

    // Zassenhaus: echelonize [A|A; B|0]; rows whose left half vanished carry
    // a basis of the intersection in the right half.
    FMatrix M(f, a.dim() + b.dim(), 2 * n);
    for (std::size_t r = 0; r < a.dim(); ++r)
        for (std::size_t c = 0; c < n; ++c) {
            M.at(r, c) = a.basis()[r][c];
            M.at(r, n + c) = a.basis()[r][c];
        }
    for (std::size_t r = 0; r < b.dim(); ++r)
        for (std::size_t c = 0; c < n; ++c) M.at(a.dim() + r, c) = b.basis()[r][c];

    auto rr = rref(std::move(M));
    std::vector<FVector> gens;
    for (std::size_t r = 0; r < rr.rank; ++r) {
        if (rr.pivots[r] < n) continue;
        FVector v = FVector::zeros(f, n);
        for (std::size_t c = 0; c < n; ++c) v[c] = rr.R.at(r, n + c);
        gens.push_back(std::move(v));
    }
    return Subspace::span(f, n, gens);
}

Coset::Coset(FVector rep, Subspace space) : space_(std::move(space)) {
    rep_ = space_.reduce(std::move(rep));
}

Coset Coset::point(FVector v) {
    Subspace zero(v.field(), v.size());
    return Coset(std::move(v), std::move(zero));
}

Coset Coset::full(Field f, std::size_t n) {
    FVector zero = FVector::zeros(f, n);
    return Coset(std::move(zero), Subspace::full(std::move(f), n));
}

std::vector<FVector> Coset::enumerate(std::uint64_t guard) const {
    auto pts = space_.enumerate(guard);
    for (auto& p : pts) p = p + rep_;
    return pts;
}

std::optional<Coset> coset_intersect(const Coset& a, const Coset& b) {
    if (a.ambient_dim() != b.ambient_dim()) throw UsageError("coset_intersect: dimension mismatch");
    const std::size_t n = a.ambient_dim();
    const Field& f = a.field() ? a.field() : b.field();

    // a.rep + A u = b.rep + B w  =>  [A | -B] [u;w] = b.rep - a.rep.
    FMatrix M(f, n, a.dim() + b.dim());
    for (std::size_t j = 0; j < a.dim(); ++j)
        for (std::size_t i = 0; i < n; ++i) M.at(i, j) = a.space().basis()[j][i];
    for (std::size_t j = 0; j < b.dim(); ++j)
        for (std::size_t i = 0; i < n; ++i) M.at(i, a.dim() + j) = f->neg(b.space().basis()[j][i]);
    FVector d = b.rep() - a.rep();

    auto sol = solve(M, d);
    if (!sol.feasible) return std::nullopt;

    FVector point = a.rep();
    for (std::size_t j = 0; j < a.dim(); ++j) point.axpy(sol.particular[j], a.space().basis()[j]);
    return Coset(std::move(point), intersect(a.space(), b.space()));
}

Coset affine_hull(Field f, std::size_t n, const std::vector<FVector>& points) {
    if (points.empty()) throw UsageError("affine_hull of no points");
    std::vector<FVector> diffs;
    for (std::size_t i = 1; i < points.size(); ++i) diffs.push_back(points[i] - points[0]);
    return Coset(points[0], Subspace::span(std::move(f), n, diffs));
}

} // namespace netcode
