// fock.cpp

#include "omprobe/fock.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "omprobe/errors.hpp"

namespace omprobe {

void TruncationSpec::validate() const {
    if (n_cav < 1 || n_mech < 1)
        throw std::invalid_argument("TruncationSpec: cutoffs must be >= 1");
    if (dim() > dim_cap) {
        std::ostringstream os;
        os << "TruncationSpec: composite dimension " << dim() << " exceeds cap " << dim_cap;
        throw DimensionCapError(os.str());
    }
}

SparseCd destroy_op(int cutoff) {
    if (cutoff < 0) throw std::invalid_argument("destroy_op: negative cutoff");
    const int dim = cutoff + 1;
    SparseCd a(dim, dim);
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(cutoff));
    for (int n = 1; n < dim; ++n)
        trips.emplace_back(n - 1, n, Complex{std::sqrt(static_cast<double>(n)), 0.0});
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

SparseCd identity_op(int dim) {
    SparseCd id(dim, dim);
    id.setIdentity();
    return id;
}

SparseCd kron_sparse(const SparseCd& a, const SparseCd& b) {
    SparseCd out(a.rows() * b.rows(), a.cols() * b.cols());
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(a.nonZeros()) * static_cast<std::size_t>(b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (SparseCd::InnerIterator ia(a, ka); ia; ++ia)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (SparseCd::InnerIterator ib(b, kb); ib; ++ib)
                    trips.emplace_back(ia.row() * b.rows() + ib.row(),
                                       ia.col() * b.cols() + ib.col(),
                                       ia.value() * ib.value());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

SparseCd cavity_destroy(const TruncationSpec& t) {
    t.validate();
    return kron_sparse(destroy_op(t.n_cav), identity_op(t.n_mech + 1));
}

SparseCd mech_destroy(const TruncationSpec& t) {
    t.validate();
    return kron_sparse(identity_op(t.n_cav + 1), destroy_op(t.n_mech));
}

} // namespace omprobe
