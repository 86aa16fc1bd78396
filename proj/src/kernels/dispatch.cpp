#include "darklattice/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace darklattice::kernels {

namespace {

Isa detect()
{
    // DARKLATTICE_ISA=scalar pins the reference path (useful for bisecting).
    if (const char* env = std::getenv("DARKLATTICE_ISA"); env && std::strcmp(env, "scalar") == 0)
        return Isa::Scalar;
    return avx2_supported() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current()
{
    static std::atomic<Isa> isa{detect()};
    return isa;
}

} // namespace

bool avx2_supported()
{
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa)
{
    if (isa == Isa::Avx2 && !avx2_supported())
        isa = Isa::Scalar;
    current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void matvec(const cplx* A, std::size_t rows, std::size_t cols, std::size_t lda,
            const cplx* x, cplx* y)
{
    if (active_isa() == Isa::Avx2)
        avx2::matvec(A, rows, cols, lda, x, y);
    else
        scalar::matvec(A, rows, cols, lda, x, y);
}

void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y)
{
    if (active_isa() == Isa::Avx2)
        avx2::axpy(n, alpha, x, y);
    else
        scalar::axpy(n, alpha, x, y);
}

cplx dotc(std::size_t n, const cplx* x, const cplx* y)
{
    return active_isa() == Isa::Avx2 ? avx2::dotc(n, x, y) : scalar::dotc(n, x, y);
}

double norm2(std::size_t n, const cplx* x)
{
    return active_isa() == Isa::Avx2 ? avx2::norm2(n, x) : scalar::norm2(n, x);
}

} // namespace darklattice::kernels
