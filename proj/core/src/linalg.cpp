#include "netcode/linalg.hpp"

#include <charconv>
#include <sstream>

namespace netcode {

namespace {
void check_fields(const Field& a, const Field& b) {
    if (a.get() != b.get() && *a != *b) throw UsageError("mixed fields in linear algebra operation");
}
} // namespace

FVector FVector::operator+(const FVector& o) const {
    check_fields(field_, o.field_);
    if (size() != o.size()) throw UsageError("vector size mismatch");
    FVector r = FVector::zeros(field_, size());
    for (std::size_t i = 0; i < size(); ++i) r.v_[i] = field_->add(v_[i], o.v_[i]);
    return r;
}

FVector FVector::operator-(const FVector& o) const {
    check_fields(field_, o.field_);
    if (size() != o.size()) throw UsageError("vector size mismatch");
    FVector r = FVector::zeros(field_, size());
    for (std::size_t i = 0; i < size(); ++i) r.v_[i] = field_->sub(v_[i], o.v_[i]);
    return r;
}

FVector FVector::scaled(std::uint32_t c) const {
    FVector r = FVector::zeros(field_, size());
    for (std::size_t i = 0; i < size(); ++i) r.v_[i] = field_->mul(c, v_[i]);
    return r;
}

void FVector::axpy(std::uint32_t c, const FVector& x) {
    check_fields(field_, x.field_);
    if (size() != x.size()) throw UsageError("vector size mismatch");
    if (c == 0) return;
    for (std::size_t i = 0; i < size(); ++i) {
        if (x.v_[i] == 0) continue;
        v_[i] = field_->add(v_[i], field_->mul(c, x.v_[i]));
    }
}

std::string FVector::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < v_.size(); ++i) {
        if (i) os << ',';
        os << v_[i];
    }
    return os.str();
}

FVector FVector::parse(Field f, std::string_view text) {
    std::vector<std::uint32_t> vals;
    if (!text.empty()) {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto next = text.find(',', pos);
            auto tok = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
            std::uint32_t x = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
            if (ec != std::errc() || ptr != tok.data() + tok.size())
                throw UsageError("bad vector literal '" + std::string(text) + "'");
            vals.push_back(x);
            if (next == std::string_view::npos) break;
            pos = next + 1;
        }
    }
    return FVector(std::move(f), std::move(vals));
}

std::uint64_t vec_index(const FVector& v) {
    const std::uint64_t q = v.field()->q();
    std::uint64_t idx = 0;
    for (std::size_t i = v.size(); i-- > 0;) idx = idx * q + v[i];
    return idx;
}

FVector vec_from_index(const Field& f, std::size_t n, std::uint64_t index) {
    const std::uint64_t q = f->q();
    FVector v = FVector::zeros(f, n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = static_cast<std::uint32_t>(index % q);
        index /= q;
    }
    return v;
}

FMatrix FMatrix::identity(Field f, std::size_t n) {
    FMatrix A(std::move(f), n, n);
    for (std::size_t i = 0; i < n; ++i) A.at(i, i) = 1;
    return A;
}

FMatrix FMatrix::from_rows(Field f, const std::vector<std::vector<std::uint32_t>>& rows) {
    std::size_t cols = rows.empty() ? 0 : rows.front().size();
    FMatrix A(std::move(f), rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw UsageError("ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (rows[r][c] >= A.field_->q()) throw UsageError("matrix entry out of field range");
            A.at(r, c) = rows[r][c];
        }
    }
    return A;
}

FVector FMatrix::row(std::size_t r) const {
    FVector v = FVector::zeros(field_, cols_);
    for (std::size_t c = 0; c < cols_; ++c) v[c] = at(r, c);
    return v;
}

void FMatrix::set_row(std::size_t r, const FVector& v) {
    if (v.size() != cols_) throw UsageError("row size mismatch");
    for (std::size_t c = 0; c < cols_; ++c) at(r, c) = v[c];
}

void FMatrix::swap_rows(std::size_t r1, std::size_t r2) {
    if (r1 == r2) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap(at(r1, c), at(r2, c));
}

FMatrix FMatrix::operator*(const FMatrix& o) const {
    check_fields(field_, o.field_);
    if (cols_ != o.rows_) throw UsageError("matrix dimension mismatch in product");
    FMatrix r(field_, rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            std::uint32_t aik = at(i, k);
            if (aik == 0) continue;
            for (std::size_t j = 0; j < o.cols_; ++j) {
                if (o.at(k, j) == 0) continue;
                r.at(i, j) = field_->add(r.at(i, j), field_->mul(aik, o.at(k, j)));
            }
        }
    return r;
}

FVector FMatrix::operator*(const FVector& x) const {
    check_fields(field_, x.field());
    if (cols_ != x.size()) throw UsageError("matrix/vector dimension mismatch");
    FVector r = FVector::zeros(field_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) {
            if (at(i, j) == 0 || x[j] == 0) continue;
            r[i] = field_->add(r[i], field_->mul(at(i, j), x[j]));
        }
    return r;
}

std::string FMatrix::to_string() const {
    std::ostringstream os;
    for (std::size_t r = 0; r < rows_; ++r) {
        if (r) os << ';';
        for (std::size_t c = 0; c < cols_; ++c) {
            if (c) os << ',';
            os << at(r, c);
        }
    }
    return os.str();
}

RrefResult rref(FMatrix A) {
    const Field& f = A.field();
    RrefResult out;
    std::size_t r = 0;
    for (std::size_t col = 0; col < A.cols() && r < A.rows(); ++col) {
        std::size_t piv = r;
        while (piv < A.rows() && A.at(piv, col) == 0) ++piv;
        if (piv == A.rows()) continue;
        A.swap_rows(r, piv);

        std::uint32_t inv = f->inv(A.at(r, col));
        A.at(r, col) = 1;
        for (std::size_t c = col + 1; c < A.cols(); ++c)
            if (A.at(r, c)) A.at(r, c) = f->mul(inv, A.at(r, c));

        for (std::size_t i = 0; i < A.rows(); ++i) {
            if (i == r) continue;
            std::uint32_t factor = A.at(i, col);
            if (factor == 0) continue;
            A.at(i, col) = 0;
            for (std::size_t c = col + 1; c < A.cols(); ++c) {
                if (A.at(r, c) == 0) continue;
                A.at(i, c) = f->sub(A.at(i, c), f->mul(factor, A.at(r, c)));
            }
        }
        out.pivots.push_back(col);
        ++r;
    }
    out.rank = r;
    out.R = std::move(A);
    return out;
}

SolveResult solve(const FMatrix& A, const FVector& b) {
    check_fields(A.field(), b.field());
    if (A.rows() != b.size()) throw UsageError("solve: rhs size mismatch");
    const Field& f = A.field();
    FMatrix aug(f, A.rows(), A.cols() + 1);
    for (std::size_t r = 0; r < A.rows(); ++r) {
        for (std::size_t c = 0; c < A.cols(); ++c) aug.at(r, c) = A.at(r, c);
        aug.at(r, A.cols()) = b[r];
    }
    auto rr = rref(std::move(aug));

    SolveResult out;
    if (!rr.pivots.empty() && rr.pivots.back() == A.cols()) {
        out.feasible = false;
        return out;
    }
    out.feasible = true;
    out.particular = FVector::zeros(f, A.cols());
    for (std::size_t i = 0; i < rr.pivots.size(); ++i)
        out.particular[rr.pivots[i]] = rr.R.at(i, A.cols());

    std::vector<bool> is_pivot(A.cols(), false);
    for (auto p : rr.pivots) is_pivot[p] = true;
    for (std::size_t free = 0; free < A.cols(); ++free) {
        if (is_pivot[free]) continue;
        FVector k = FVector::zeros(f, A.cols());
        k[free] = 1;
        for (std::size_t i = 0; i < rr.pivots.size(); ++i)
            if (rr.R.at(i, free)) k[rr.pivots[i]] = f->neg(rr.R.at(i, free));
        out.kernel.push_back(std::move(k));
    }
    return out;
}

} // namespace netcode
