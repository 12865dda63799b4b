#include <sstream>

#include "groups/families.hpp"

namespace grwalk::detail {
namespace {

// (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x y'), i.e. upper unitriangular
// matrices [[1,x,z],[0,1,y],[0,0,1]].
class HeisenbergGroup final : public Group {
 public:
  explicit HeisenbergGroup(const GroupSpec& spec) : Group(spec) {
    set_generators({make(1, 0, 0), make(-1, 0, 0), make(0, 1, 0), make(0, -1, 0)},
                   {"x", "x^-1", "y", "y^-1"});
  }

  GroupElement identity() const override { return make(0, 0, 0); }

  std::string describe(const GroupElement& g) const override {
    std::ostringstream os;
    os << "(" << g.code()[1] << "," << g.code()[2] << "," << g.code()[3] << ")";
    return os.str();
  }

  bool is_valid(const GroupElement& g) const override {
    return g.tag() == tag() && g.code().size() == 4;
  }

 protected:
  GroupElement multiply_impl(const GroupElement& a, const GroupElement& b) const override {
    auto p = a.code();
    auto q = b.code();
    return make(checked_add(p[1], q[1]), checked_add(p[2], q[2]),
                checked_add(checked_add(p[3], q[3]), checked_mul(p[1], q[2])));
  }

  GroupElement inverse_impl(const GroupElement& a) const override {
    auto p = a.code();
    return make(checked_neg(p[1]), checked_neg(p[2]),
                checked_add(checked_neg(p[3]), checked_mul(p[1], p[2])));
  }

 private:
  GroupElement make(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return GroupElement(GroupElement::Code{tag(), x, y, z});
  }
};

}  // namespace

std::unique_ptr<Group> make_heisenberg(const GroupSpec& spec) {
  return std::make_unique<HeisenbergGroup>(spec);
}

}  // namespace grwalk::detail
