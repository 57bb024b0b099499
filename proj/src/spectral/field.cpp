#include <cmath>

#include "snls/error.hpp"
#include "snls/kernels.hpp"
#include "snls/spectral.hpp"

namespace snls {

Field::Field(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), cplx{}) {}

Field::Field(GridPtr grid, std::span<const cplx> values)
    : grid_(std::move(grid)), values_(values.begin(), values.end()) {
  if (values_.size() != grid_->size())
    throw GridMismatch("value count does not match grid size");
}

bool Field::all_finite() const noexcept {
  for (const auto& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

void Field::require_finite(const char* what, double time) const {
  if (!all_finite())
    throw NumericFailure(std::string("non-finite values in ") + what, time);
}

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid_ptr() != b.grid_ptr() && !a.grid().same_shape(b.grid()))
    throw GridMismatch("fields live on different grids");
}

Field& Field::operator+=(const Field& o) {
  require_same_grid(*this, o);
  kernels::axpy(values_, cplx(1.0, 0.0), o.values());
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(*this, o);
  kernels::axpy(values_, cplx(-1.0, 0.0), o.values());
  return *this;
}

Field& Field::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}

Field& Field::operator*=(double s) {
  kernels::scale(values_, s);
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }
Field operator*(double s, Field a) { return a *= s; }

}  // namespace snls
