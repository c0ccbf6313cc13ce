// fock.hpp — truncated two-mode Fock space and ladder operators

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "omprobe/types.hpp"

namespace omprobe {

using SparseCd = Eigen::SparseMatrix<Complex>;
using MatrixCd = Eigen::MatrixXcd;
using VectorCd = Eigen::VectorXcd;

/// Photon/phonon cutoffs. Composite dimension D = (n_cav+1)*(n_mech+1) is
/// bounded by dim_cap to keep the D^2 x D^2 Liouvillian tractable.
struct TruncationSpec {
    int n_cav = 5;
    int n_mech = 8;
    int dim_cap = 4096;

    int dim() const { return (n_cav + 1) * (n_mech + 1); }
    void validate() const;
    bool operator==(const TruncationSpec& o) const {
        return n_cav == o.n_cav && n_mech == o.n_mech;
    }
};

/// Annihilation operator with the standard sqrt(n) matrix elements on a
/// (cutoff+1)-dimensional ladder.
SparseCd destroy_op(int cutoff);

SparseCd identity_op(int dim);

/// Composite-space operators (cavity factor first: index = i_c*(n_mech+1) + i_m).
SparseCd cavity_destroy(const TruncationSpec& trunc);
SparseCd mech_destroy(const TruncationSpec& trunc);

SparseCd kron_sparse(const SparseCd& a, const SparseCd& b);

} // namespace omprobe
