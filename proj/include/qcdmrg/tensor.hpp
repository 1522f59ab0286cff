#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qcdmrg {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape &dims);

/// Dense complex tensor stored row-major over `dims` (last index fastest).
/// A rank-0 tensor holds a single scalar.
class DenseTensor {
  public:
    DenseTensor() : data_(1, cplx{0.0, 0.0}) {}
    explicit DenseTensor(Shape dims);
    DenseTensor(Shape dims, std::vector<cplx> data);

    static DenseTensor scalar(cplx value);
    static DenseTensor identity(std::size_t n);

    const Shape &dims() const noexcept { return dims_; }
    std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const cplx> data() const noexcept { return data_; }
    std::span<cplx> data() noexcept { return data_; }
    const std::vector<cplx> &values() const noexcept { return data_; }

    cplx &operator[](std::size_t flat) { return data_[flat]; }
    const cplx &operator[](std::size_t flat) const { return data_[flat]; }

    cplx &at(std::initializer_list<std::size_t> index);
    const cplx &at(std::initializer_list<std::size_t> index) const;

    const std::vector<std::string> &labels() const noexcept { return labels_; }
    void set_labels(std::vector<std::string> labels);

    DenseTensor &operator*=(cplx alpha);
    DenseTensor &operator+=(const DenseTensor &other);

  private:
    std::size_t flat_index(std::initializer_list<std::size_t> index) const;

    Shape dims_;
    std::vector<cplx> data_;
    std::vector<std::string> labels_;
};

DenseTensor operator*(cplx alpha, DenseTensor t);
DenseTensor conj(DenseTensor t);

/// Contract paired axes of `a` and `b`. Result axes are the unpaired axes
/// of `a` followed by the unpaired axes of `b`, each in original order.
DenseTensor contract(const DenseTensor &a, const DenseTensor &b,
                     const std::vector<std::pair<std::size_t, std::size_t>> &pairs);

/// Explicit transpose: result axis k is input axis perm[k].
DenseTensor permute(const DenseTensor &t, const std::vector<std::size_t> &perm);

/// Pure reinterpretation of the canonical layout.
DenseTensor reshape(const DenseTensor &t, Shape new_dims);

double norm2(const DenseTensor &t);

/// Full contraction sum(conj(a) * b); shapes must have equal size.
cplx inner(const DenseTensor &a, const DenseTensor &b);

struct SvdResult {
    DenseTensor u;          ///< left axes + [k]
    std::vector<double> s;  ///< descending, non-negative
    DenseTensor v;          ///< [k] + right axes
    double discarded_weight = 0.0; ///< sum of squared dropped singular values
};

/// SVD across the bipartition `left_axes` | remaining axes. `max_rank` is
/// applied first, then `cutoff` drops values with s_k / s_0 < cutoff.
SvdResult split_svd(const DenseTensor &t, const std::vector<std::size_t> &left_axes,
                    std::optional<std::size_t> max_rank = std::nullopt,
                    std::optional<double> cutoff = std::nullopt);

struct QrResult {
    DenseTensor q; ///< left axes + [k], orthonormal columns
    DenseTensor r; ///< [k] + right axes
};

QrResult split_qr(const DenseTensor &t, const std::vector<std::size_t> &left_axes);

/// Singular values only of `t` viewed as a (rows x cols) matrix.
std::vector<double> singular_values(std::span<const cplx> data, std::size_t rows,
                                    std::size_t cols);

} // namespace qcdmrg
