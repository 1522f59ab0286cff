#include "qcdmrg/tensor.hpp"

#include "qcdmrg/error.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qcdmrg {

namespace {

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using MatMap = Eigen::Map<RowMatrix>;

[[noreturn]] void fail(const std::string &what) { throw Error("tensor", what); }

bool is_identity(const std::vector<std::size_t> &perm) {
    for (std::size_t i = 0; i < perm.size(); ++i)
        if (perm[i] != i)
            return false;
    return true;
}

// Axis bookkeeping for a bipartition into (left_axes, remaining axes).
struct Bipartition {
    std::vector<std::size_t> perm;
    Shape left_dims;
    Shape right_dims;
    std::size_t rows = 1;
    std::size_t cols = 1;
};

Bipartition make_bipartition(const DenseTensor &t, const std::vector<std::size_t> &left_axes) {
    const std::size_t n = t.rank();
    if (left_axes.empty() || left_axes.size() >= n)
        fail("left_axes must be a proper nonempty subset of the tensor axes");
    std::vector<bool> used(n, false);
    Bipartition bp;
    for (auto ax : left_axes) {
        if (ax >= n)
            fail("axis " + std::to_string(ax) + " out of range");
        if (used[ax])
            fail("duplicate axis " + std::to_string(ax));
        used[ax] = true;
        bp.perm.push_back(ax);
        bp.left_dims.push_back(t.dim(ax));
        bp.rows *= t.dim(ax);
    }
    for (std::size_t ax = 0; ax < n; ++ax) {
        if (!used[ax]) {
            bp.perm.push_back(ax);
            bp.right_dims.push_back(t.dim(ax));
            bp.cols *= t.dim(ax);
        }
    }
    return bp;
}

void check_finite(std::span<const cplx> data, const char *what) {
    for (const auto &z : data)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            fail(std::string(what) + ": non-finite value encountered");
}

} // namespace

std::size_t shape_size(const Shape &dims) {
    std::size_t n = 1;
    for (auto d : dims)
        n *= d;
    return n;
}

DenseTensor::DenseTensor(Shape dims) : dims_(std::move(dims)) {
    for (auto d : dims_)
        if (d == 0)
            fail("tensor extents must be >= 1");
    data_.assign(shape_size(dims_), cplx{0.0, 0.0});
}

DenseTensor::DenseTensor(Shape dims, std::vector<cplx> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    for (auto d : dims_)
        if (d == 0)
            fail("tensor extents must be >= 1");
    if (shape_size(dims_) != data_.size())
        fail("data length " + std::to_string(data_.size()) + " does not match extents");
}

DenseTensor DenseTensor::scalar(cplx value) { return DenseTensor(Shape{}, {value}); }

DenseTensor DenseTensor::identity(std::size_t n) {
    DenseTensor t(Shape{n, n});
    for (std::size_t i = 0; i < n; ++i)
        t[i * n + i] = 1.0;
    return t;
}

std::size_t DenseTensor::flat_index(std::initializer_list<std::size_t> index) const {
    if (index.size() != dims_.size())
        fail("index rank mismatch");
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (auto i : index) {
        if (i >= dims_[axis])
            fail("index out of range");
        flat = flat * dims_[axis] + i;
        ++axis;
    }
    return flat;
}

cplx &DenseTensor::at(std::initializer_list<std::size_t> index) {
    return data_[flat_index(index)];
}

const cplx &DenseTensor::at(std::initializer_list<std::size_t> index) const {
    return data_[flat_index(index)];
}

void DenseTensor::set_labels(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != dims_.size())
        fail("label count must match rank");
    labels_ = std::move(labels);
}

DenseTensor &DenseTensor::operator*=(cplx alpha) {
    for (auto &z : data_)
        z *= alpha;
    return *this;
}

DenseTensor &DenseTensor::operator+=(const DenseTensor &other) {
    if (other.dims_ != dims_)
        fail("shape mismatch in addition");
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] += other.data_[i];
    return *this;
}

DenseTensor operator*(cplx alpha, DenseTensor t) {
    t *= alpha;
    return t;
}

DenseTensor conj(DenseTensor t) {
    for (auto &z : t.data())
        z = std::conj(z);
    return t;
}

DenseTensor permute(const DenseTensor &t, const std::vector<std::size_t> &perm) {
    const std::size_t n = t.rank();
    if (perm.size() != n)
        fail("permutation length does not match rank");
    std::vector<bool> seen(n, false);
    for (auto p : perm) {
        if (p >= n || seen[p])
            fail("invalid permutation");
        seen[p] = true;
    }
    if (is_identity(perm))
        return t;

    Shape in_strides(n, 1);
    for (std::size_t k = n; k-- > 1;)
        in_strides[k - 1] = in_strides[k] * t.dim(k);
    Shape out_dims(n), strides(n);
    for (std::size_t k = 0; k < n; ++k) {
        out_dims[k] = t.dim(perm[k]);
        strides[k] = in_strides[perm[k]];
    }

    std::vector<cplx> out(t.size());
    const auto src = t.data();
    // Innermost output axis handled by a tight loop; remaining axes by odometer.
    const std::size_t inner = out_dims[n - 1];
    const std::size_t inner_stride = strides[n - 1];
    std::vector<std::size_t> counter(n, 0);
    std::size_t offset = 0;
    for (std::size_t pos = 0; pos < out.size(); pos += inner) {
        for (std::size_t i = 0; i < inner; ++i)
            out[pos + i] = src[offset + i * inner_stride];
        for (std::size_t k = n - 1; k-- > 0;) {
            if (++counter[k] < out_dims[k]) {
                offset += strides[k];
                break;
            }
            offset -= strides[k] * (out_dims[k] - 1);
            counter[k] = 0;
        }
    }
    return DenseTensor(std::move(out_dims), std::move(out));
}

DenseTensor reshape(const DenseTensor &t, Shape new_dims) {
    if (shape_size(new_dims) != t.size())
        fail("reshape size mismatch");
    return DenseTensor(std::move(new_dims), t.values());
}

DenseTensor contract(const DenseTensor &a, const DenseTensor &b,
                     const std::vector<std::pair<std::size_t, std::size_t>> &pairs) {
    std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
    std::vector<std::size_t> paired_a, paired_b;
    std::size_t k = 1;
    for (auto [ia, ib] : pairs) {
        if (ia >= a.rank() || ib >= b.rank())
            fail("contraction axis out of range");
        if (used_a[ia] || used_b[ib])
            fail("axis paired twice");
        if (a.dim(ia) != b.dim(ib))
            fail("extent mismatch on contracted pair (" + std::to_string(ia) + ", " +
                 std::to_string(ib) + ")");
        used_a[ia] = used_b[ib] = true;
        paired_a.push_back(ia);
        paired_b.push_back(ib);
        k *= a.dim(ia);
    }

    std::vector<std::size_t> perm_a, perm_b;
    Shape out_dims;
    std::size_t m = 1, n = 1;
    for (std::size_t i = 0; i < a.rank(); ++i) {
        if (!used_a[i]) {
            perm_a.push_back(i);
            out_dims.push_back(a.dim(i));
            m *= a.dim(i);
        }
    }
    perm_a.insert(perm_a.end(), paired_a.begin(), paired_a.end());
    perm_b = paired_b;
    for (std::size_t i = 0; i < b.rank(); ++i) {
        if (!used_b[i]) {
            perm_b.push_back(i);
            out_dims.push_back(b.dim(i));
            n *= b.dim(i);
        }
    }

    const DenseTensor pa = permute(a, perm_a);
    const DenseTensor pb = permute(b, perm_b);
    std::vector<cplx> out(m * n);
    ConstMatMap ma(pa.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
    ConstMatMap mb(pb.data().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
    MatMap mc(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    mc.noalias() = ma * mb;
    return DenseTensor(std::move(out_dims), std::move(out));
}

double norm2(const DenseTensor &t) {
    double s = 0.0;
    for (const auto &z : t.data())
        s += std::norm(z);
    return s;
}

cplx inner(const DenseTensor &a, const DenseTensor &b) {
    if (a.size() != b.size())
        fail("inner product size mismatch");
    cplx s{0.0, 0.0};
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i)
        s += std::conj(da[i]) * db[i];
    return s;
}

SvdResult split_svd(const DenseTensor &t, const std::vector<std::size_t> &left_axes,
                    std::optional<std::size_t> max_rank, std::optional<double> cutoff) {
    const Bipartition bp = make_bipartition(t, left_axes);
    const DenseTensor pt = permute(t, bp.perm);
    check_finite(pt.data(), "split_svd input");

    const auto rows = static_cast<Eigen::Index>(bp.rows);
    const auto cols = static_cast<Eigen::Index>(bp.cols);
    Eigen::MatrixXcd mat = ConstMatMap(pt.data().data(), rows, cols);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        fail("SVD did not converge");

    const auto &sv = svd.singularValues();
    std::size_t full = static_cast<std::size_t>(sv.size());
    std::size_t keep = full;
    if (max_rank)
        keep = std::min(keep, std::max<std::size_t>(*max_rank, 1));
    if (cutoff && sv(0) > 0.0) {
        std::size_t k = 1;
        while (k < keep && sv(static_cast<Eigen::Index>(k)) / sv(0) >= *cutoff)
            ++k;
        keep = k;
    }

    SvdResult res;
    res.s.resize(keep);
    for (std::size_t i = 0; i < full; ++i) {
        const double v = sv(static_cast<Eigen::Index>(i));
        if (!std::isfinite(v))
            fail("SVD produced non-finite singular values");
        if (i < keep)
            res.s[i] = v;
        else
            res.discarded_weight += v * v;
    }

    const auto kk = static_cast<Eigen::Index>(keep);
    Shape udims = bp.left_dims;
    udims.push_back(keep);
    std::vector<cplx> udata(bp.rows * keep);
    MatMap(udata.data(), rows, kk) = svd.matrixU().leftCols(kk);
    Shape vdims{keep};
    vdims.insert(vdims.end(), bp.right_dims.begin(), bp.right_dims.end());
    std::vector<cplx> vdata(keep * bp.cols);
    MatMap(vdata.data(), kk, cols) = svd.matrixV().leftCols(kk).adjoint();
    check_finite(udata, "split_svd U");
    check_finite(vdata, "split_svd V");

    res.u = DenseTensor(std::move(udims), std::move(udata));
    res.v = DenseTensor(std::move(vdims), std::move(vdata));
    return res;
}

QrResult split_qr(const DenseTensor &t, const std::vector<std::size_t> &left_axes) {
    const Bipartition bp = make_bipartition(t, left_axes);
    const DenseTensor pt = permute(t, bp.perm);
    const auto rows = static_cast<Eigen::Index>(bp.rows);
    const auto cols = static_cast<Eigen::Index>(bp.cols);
    const auto k = std::min(rows, cols);

    Eigen::MatrixXcd mat = ConstMatMap(pt.data().data(), rows, cols);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(mat);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, k);
    Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

    Shape qdims = bp.left_dims;
    qdims.push_back(static_cast<std::size_t>(k));
    std::vector<cplx> qdata(static_cast<std::size_t>(rows * k));
    MatMap(qdata.data(), rows, k) = q;
    Shape rdims{static_cast<std::size_t>(k)};
    rdims.insert(rdims.end(), bp.right_dims.begin(), bp.right_dims.end());
    std::vector<cplx> rdata(static_cast<std::size_t>(k * cols));
    MatMap(rdata.data(), k, cols) = r;
    return {DenseTensor(std::move(qdims), std::move(qdata)),
            DenseTensor(std::move(rdims), std::move(rdata))};
}

std::vector<double> singular_values(std::span<const cplx> data, std::size_t rows,
                                    std::size_t cols) {
    if (data.size() != rows * cols)
        fail("singular_values: size mismatch");
    check_finite(data, "singular_values input");
    Eigen::MatrixXcd mat =
        ConstMatMap(data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(mat);
    if (svd.info() != Eigen::Success)
        fail("SVD did not converge");
    std::vector<double> s(static_cast<std::size_t>(svd.singularValues().size()));
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = svd.singularValues()(static_cast<Eigen::Index>(i));
    return s;
}

} // namespace qcdmrg
