#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "netcode/field.hpp"

namespace netcode {

// Dense vector over a finite field. Entries hold canonical representations;
// arithmetic goes through the FieldSpec so operation counters see it.
class FVector {
public:
    FVector() = default;
    FVector(Field f, std::vector<std::uint32_t> values) : field_(std::move(f)), v_(std::move(values)) {
        for (auto x : v_)
            if (x >= field_->q()) throw UsageError("vector entry out of field range");
    }
    // Named to keep FVector(f, {c}) unambiguous: a braced single element must
    // mean a one-coordinate vector, never a length.
    static FVector zeros(Field f, std::size_t n) {
        FVector v;
        v.field_ = std::move(f);
        v.v_.assign(n, 0);
        return v;
    }

    const Field& field() const { return field_; }
    std::size_t size() const { return v_.size(); }
    std::uint32_t operator[](std::size_t i) const { return v_[i]; }
    std::uint32_t& operator[](std::size_t i) { return v_[i]; }
    const std::vector<std::uint32_t>& raw() const { return v_; }

    bool is_zero() const {
        for (auto x : v_)
            if (x) return false;
        return true;
    }

    FVector operator+(const FVector& o) const;
    FVector operator-(const FVector& o) const;
    FVector scaled(std::uint32_t c) const;
    void axpy(std::uint32_t c, const FVector& x); // *this += c*x

    friend bool operator==(const FVector& a, const FVector& b) { return a.v_ == b.v_; }
    friend bool operator!=(const FVector& a, const FVector& b) { return !(a == b); }

    // "1,0,2" (empty string for the zero-length vector).
    std::string to_string() const;
    static FVector parse(Field f, std::string_view text);

private:
    Field field_;
    std::vector<std::uint32_t> v_;
};

// Mixed-radix index of a vector: sum of repr_i * q^i, coordinate 0 least
// significant. Used to address table entries by assignment.
std::uint64_t vec_index(const FVector& v);
FVector vec_from_index(const Field& f, std::size_t n, std::uint64_t index);

class FMatrix {
public:
    FMatrix() = default;
    FMatrix(Field f, std::size_t rows, std::size_t cols)
        : field_(std::move(f)), rows_(rows), cols_(cols), a_(rows * cols, 0) {}

    static FMatrix identity(Field f, std::size_t n);
    static FMatrix from_rows(Field f, const std::vector<std::vector<std::uint32_t>>& rows);

    const Field& field() const { return field_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::uint32_t at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
    std::uint32_t& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }

    FVector row(std::size_t r) const;
    void set_row(std::size_t r, const FVector& v);
    void swap_rows(std::size_t r1, std::size_t r2);

    FMatrix operator*(const FMatrix& o) const;
    FVector operator*(const FVector& x) const;

    friend bool operator==(const FMatrix& a, const FMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
    }
    friend bool operator!=(const FMatrix& a, const FMatrix& b) { return !(a == b); }

    std::string to_string() const; // rows joined by ';'

private:
    Field field_;
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::uint32_t> a_;
};

struct RrefResult {
    FMatrix R;
    std::size_t rank = 0;
    std::vector<std::size_t> pivots; // pivot column per pivot row, ascending
};

// Reduced row echelon form: pivots are 1 with zeros above and below.
RrefResult rref(FMatrix A);

struct SolveResult {
    bool feasible = false;
    FVector particular;          // one solution when feasible
    std::vector<FVector> kernel; // basis of the homogeneous solution space
};

// Solve A x = b over the field of A.
SolveResult solve(const FMatrix& A, const FVector& b);

} // namespace netcode
