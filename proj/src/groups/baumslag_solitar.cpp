#include <sstream>

#include "groups/families.hpp"

namespace grwalk::detail {
namespace {

// Elements are affine maps x -> q^m x + r with r = num / q^k in Z[1/q].
// Lowest terms: k = 0 or q does not divide num; num = 0 forces k = 0.
// Product is composition: (m, r)(m', r') = (m + m', q^m r' + r).
class BaumslagSolitarGroup final : public Group {
 public:
  explicit BaumslagSolitarGroup(const GroupSpec& spec) : Group(spec), q_(spec.q) {
    set_generators({make(1, 0, 0), make(-1, 0, 0), make(0, 1, 0), make(0, -1, 0)},
                   {"t", "t^-1", "x", "x^-1"});
  }

  GroupElement identity() const override { return make(0, 0, 0); }

  std::string describe(const GroupElement& g) const override {
    auto c = g.code();
    std::ostringstream os;
    os << "(m=" << c[1] << ", r=" << c[2];
    if (c[3] != 0) os << "/" << q_ << "^" << c[3];
    os << ")";
    return os.str();
  }

  bool is_valid(const GroupElement& g) const override {
    auto c = g.code();
    if (g.tag() != tag() || c.size() != 4 || c[3] < 0) return false;
    if (c[2] == 0) return c[3] == 0;
    return c[3] == 0 || c[2] % q_ != 0;
  }

 protected:
  GroupElement multiply_impl(const GroupElement& a, const GroupElement& b) const override {
    auto x = a.code();
    auto y = b.code();
    // q^m * (num'/q^k') as num''/q^k''
    auto [sn, sk] = scale(y[2], y[3], x[1]);
    auto [n, k] = add(x[2], x[3], sn, sk);
    return make(checked_add(x[1], y[1]), n, k);
  }

  GroupElement inverse_impl(const GroupElement& a) const override {
    auto x = a.code();
    // (m, r)^-1 = (-m, -q^-m r)
    auto [n, k] = scale(x[2], x[3], checked_neg(x[1]));
    return make(checked_neg(x[1]), checked_neg(n), k);
  }

 private:
  GroupElement make(std::int64_t m, std::int64_t num, std::int64_t k) const {
    auto [n, kk] = normalize(num, k);
    return GroupElement(GroupElement::Code{tag(), m, n, kk});
  }

  std::pair<std::int64_t, std::int64_t> normalize(std::int64_t num, std::int64_t k) const {
    if (num == 0) return {0, 0};
    while (k > 0 && num % q_ == 0) {
      num /= q_;
      --k;
    }
    return {num, k};
  }

  // num/q^k * q^e
  std::pair<std::int64_t, std::int64_t> scale(std::int64_t num, std::int64_t k, std::int64_t e) const {
    std::int64_t nk = k - e;
    if (nk >= 0) return normalize(num, nk);
    return {checked_mul(num, checked_pow(q_, -nk)), 0};
  }

  std::pair<std::int64_t, std::int64_t> add(std::int64_t n1, std::int64_t k1, std::int64_t n2,
                                            std::int64_t k2) const {
    std::int64_t k = std::max(k1, k2);
    std::int64_t a = checked_mul(n1, checked_pow(q_, k - k1));
    std::int64_t b = checked_mul(n2, checked_pow(q_, k - k2));
    return normalize(checked_add(a, b), k);
  }

  std::int64_t q_;
};

}  // namespace

std::unique_ptr<Group> make_baumslag_solitar(const GroupSpec& spec) {
  return std::make_unique<BaumslagSolitarGroup>(spec);
}

}  // namespace grwalk::detail
