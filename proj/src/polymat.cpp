#include "codedq/polymat.hpp"

#include <stdexcept>

namespace codedq {

PolyMatrix polymat_multiply(const PolyMatrix& a, const PolyMatrix& b) {
    if (a.dim() != b.dim()) throw std::logic_error("polymat dimension mismatch");
    const int dim = a.dim();
    const int da = a.degree();
    const int db = b.degree();
    PolyMatrix out(dim, da + db);
    for (int r = 0; r < dim; ++r) {
        for (int col = 0; col < dim; ++col) {
            for (int k = 0; k < dim; ++k) {
                const double* pa = a.entry(r, k);
                const double* pb = b.entry(k, col);
                for (int i = 0; i <= da; ++i) {
                    if (pa[i] == 0.0) continue;
                    for (int j = 0; j <= db; ++j) out.at(r, col, i + j) += pa[i] * pb[j];
                }
            }
        }
    }
    return out;
}

PolyMatrix polymat_power(const PolyMatrix& step, int n) {
    if (n < 1) throw std::logic_error("polymat power requires n >= 1");
    PolyMatrix acc = step;
    for (int i = 1; i < n; ++i) acc = polymat_multiply(acc, step);
    return acc;
}

} // namespace codedq
