#include "darklattice/kernels.hpp"

namespace darklattice::kernels::scalar {

void matvec(const cplx* A, std::size_t rows, std::size_t cols, std::size_t lda,
            const cplx* x, cplx* y)
{
    for (std::size_t i = 0; i < rows; ++i)
        y[i] = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        const cplx* col = A + j * lda;
        const double xr = x[j].real(), xi = x[j].imag();
        for (std::size_t i = 0; i < rows; ++i) {
            const double ar = col[i].real(), ai = col[i].imag();
            y[i] += cplx(ar * xr - ai * xi, ai * xr + ar * xi);
        }
    }
}

void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += alpha * x[i];
}

cplx dotc(std::size_t n, const cplx* x, const cplx* y)
{
    cplx s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += std::conj(x[i]) * y[i];
    return s;
}

double norm2(std::size_t n, const cplx* x)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += std::norm(x[i]);
    return s;
}

} // namespace darklattice::kernels::scalar
