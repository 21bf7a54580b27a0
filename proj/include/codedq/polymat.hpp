#pragma once

// Square matrices whose entries are polynomials in a formal mark x.
// Raising the one-step matrix to the N-th power and extracting the
// coefficient of x^j yields joint laws of (mark count, end state | start
// state). Products use full convolution; coefficients stay exact in
// floating point and the cost is O(dim^3 N^2) for an N-th power, which is
// fine at block lengths up to ~1000.

#include <vector>

namespace codedq {

class PolyMatrix {
  public:
    PolyMatrix(int dim, int degree)
        : dim_(dim), deg_(degree), c_(static_cast<size_t>(dim) * dim * (degree + 1), 0.0) {}

    int dim() const { return dim_; }
    int degree() const { return deg_; }

    double& at(int r, int col, int k) { return c_[idx(r, col, k)]; }
    double at(int r, int col, int k) const { return c_[idx(r, col, k)]; }

    /// coefficient sequence of entry (r, col), length degree()+1
    const double* entry(int r, int col) const { return &c_[idx(r, col, 0)]; }

  private:
    size_t idx(int r, int col, int k) const {
        return (static_cast<size_t>(r) * dim_ + col) * (deg_ + 1) + k;
    }

    int dim_;
    int deg_;
    std::vector<double> c_;
};

PolyMatrix polymat_multiply(const PolyMatrix& a, const PolyMatrix& b);

/// step^n by sequential multiplication (degree grows by step.degree() each
/// factor, so intermediate sizes stay minimal).
PolyMatrix polymat_power(const PolyMatrix& step, int n);

} // namespace codedq
