#include "darklattice/linalg.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <mutex>

#include <complex>
#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

extern "C" void openblas_set_num_threads(int);

namespace darklattice {

void init_linalg()
{
    static std::once_flag once;
    std::call_once(once, [] { openblas_set_num_threads(1); });
}

std::string matrix_digest(const CMatrix& A)
{
    // FNV-1a over the raw doubles.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(A.data());
    const std::size_t n = static_cast<std::size_t>(A.size()) * sizeof(cplx);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

EigenDecomposition eig(const CMatrix& A, bool want_vectors)
{
    init_linalg();
    if (A.rows() != A.cols())
        throw EigenError("eig: matrix is not square");
    const lapack_int n = static_cast<lapack_int>(A.rows());
    EigenDecomposition out;
    out.values.resize(n);
    if (n == 0)
        return out;

    CMatrix work = A;
    if (!work.allFinite())
        throw EigenError("eig: non-finite matrix entries (digest " + matrix_digest(A) + ")");
    if (want_vectors)
        out.vectors.resize(n, n);
    lapack_complex_double dummy;
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n,
        reinterpret_cast<lapack_complex_double*>(work.data()), n,
        reinterpret_cast<lapack_complex_double*>(out.values.data()),
        &dummy, 1,
        want_vectors ? reinterpret_cast<lapack_complex_double*>(out.vectors.data()) : &dummy,
        want_vectors ? n : 1);
    if (info != 0)
        throw EigenError("eig: zgeev failed with info=" + std::to_string(info) + " (digest "
                         + matrix_digest(A) + ")");
    return out;
}

} // namespace darklattice
