#include "grwalk/group.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "grwalk/errors.hpp"
#include "grwalk/measure.hpp"
#include "groups/families.hpp"

namespace grwalk {

std::string to_string(Family f) {
  switch (f) {
    case Family::ZPowD: return "ZPowD";
    case Family::Heisenberg: return "Heisenberg";
    case Family::LamplighterOverZ: return "LamplighterOverZ";
    case Family::WreathZOverZ: return "WreathZOverZ";
    case Family::BaumslagSolitar: return "BaumslagSolitar";
    case Family::BubbleWreath: return "BubbleWreath";
  }
  return "?";
}

GroupSpec GroupSpec::z(int d) {
  GroupSpec s;
  s.family = Family::ZPowD;
  s.dim = d;
  return s;
}

GroupSpec GroupSpec::heisenberg() {
  GroupSpec s;
  s.family = Family::Heisenberg;
  return s;
}

GroupSpec GroupSpec::lamplighter(int d, int lamp_order) {
  GroupSpec s;
  s.family = Family::LamplighterOverZ;
  s.dim = d;
  s.lamp_order = lamp_order;
  return s;
}

GroupSpec GroupSpec::wreath_z_over_z() {
  GroupSpec s;
  s.family = Family::WreathZOverZ;
  return s;
}

GroupSpec GroupSpec::baumslag_solitar(int q) {
  GroupSpec s;
  s.family = Family::BaumslagSolitar;
  s.q = q;
  return s;
}

GroupSpec GroupSpec::bubble_wreath(ScalingSequence seq) {
  GroupSpec s;
  s.family = Family::BubbleWreath;
  s.bubble = std::move(seq);
  return s;
}

namespace {

int parse_int(std::string_view text, const std::string& whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw UsageError("cannot parse group spec '" + whole + "'");
  return v;
}

double parse_double(std::string_view text, const std::string& whole) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw UsageError("cannot parse group spec '" + whole + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// "", "^d" -> d (default 1)
int parse_lattice_dim(std::string_view rest, const std::string& whole) {
  if (rest.empty()) return 1;
  if (rest.front() != '^') throw UsageError("cannot parse group spec '" + whole + "'");
  return parse_int(rest.substr(1), whole);
}

}  // namespace

GroupSpec GroupSpec::parse(const std::string& text) {
  std::string t;
  for (char c : text)
    if (c != ' ') t.push_back(c);
  std::string lower = t;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  GroupSpec spec;
  if (lower == "heisenberg" || lower == "h3") {
    spec = heisenberg();
  } else if (lower.rfind("bs(1,", 0) == 0 && lower.back() == ')') {
    spec = baumslag_solitar(parse_int(std::string_view(lower).substr(5, lower.size() - 6), text));
  } else if (lower.rfind("bubble:", 0) == 0) {
    std::string_view body = std::string_view(lower).substr(7);
    if (body.rfind("theta=", 0) == 0) {
      double theta = 0;
      int levels = 0;
      for (auto part : split(body, ',')) {
        if (part.rfind("theta=", 0) == 0)
          theta = parse_double(part.substr(6), text);
        else if (part.rfind("l=", 0) == 0)
          levels = parse_int(part.substr(2), text);
        else
          throw UsageError("cannot parse group spec '" + text + "'");
      }
      spec = bubble_wreath(ScalingSequence::geometric(theta, levels));
    } else {
      std::vector<int> alphas;
      for (auto part : split(body, ',')) alphas.push_back(parse_int(part, text));
      spec = bubble_wreath(ScalingSequence::explicit_list(std::move(alphas)));
    }
  } else if (lower.rfind("zwrz", 0) == 0 && lower.size() == 4) {
    spec = wreath_z_over_z();
  } else if (auto w = lower.find("wrz"); w != std::string::npos && lower[0] == 'z') {
    int m = parse_int(std::string_view(lower).substr(1, w - 1), text);
    int d = parse_lattice_dim(std::string_view(lower).substr(w + 3), text);
    spec = lamplighter(d, m);
  } else if (!lower.empty() && lower[0] == 'z') {
    spec = z(parse_lattice_dim(std::string_view(lower).substr(1), text));
  } else {
    throw UsageError("unknown group '" + text + "'");
  }
  spec.validate();
  return spec;
}

std::string GroupSpec::canonical_text() const {
  std::ostringstream os;
  switch (family) {
    case Family::ZPowD: os << "Z"; if (dim != 1) os << "^" << dim; break;
    case Family::Heisenberg: os << "heisenberg"; break;
    case Family::LamplighterOverZ:
      os << "Z" << lamp_order << "wrZ";
      if (dim != 1) os << "^" << dim;
      break;
    case Family::WreathZOverZ: os << "ZwrZ"; break;
    case Family::BaumslagSolitar: os << "BS(1," << q << ")"; break;
    case Family::BubbleWreath: {
      os << "bubble:";
      const auto& seq = *bubble;
      if (seq.is_geometric()) {
        char buf[64];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, seq.theta());
        os << "theta=" << std::string(buf, p) << ",L=" << seq.levels();
      } else {
        auto v = seq.values();
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
      }
      break;
    }
  }
  return os.str();
}

std::uint64_t GroupSpec::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical_text()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void GroupSpec::validate() const {
  switch (family) {
    case Family::ZPowD:
      if (dim < 1) throw UsageError("Z^d requires d >= 1");
      break;
    case Family::LamplighterOverZ:
      if (dim < 1) throw UsageError("lamplighter requires lattice dimension d >= 1");
      if (lamp_order < 2) throw UsageError("lamplighter requires lamp order m >= 2");
      break;
    case Family::BaumslagSolitar:
      if (q < 2) throw UsageError("BS(1,q) requires q >= 2");
      break;
    case Family::BubbleWreath:
      if (!bubble || bubble->levels() < 1) throw UsageError("bubble group requires a scaling sequence");
      break;
    default: break;
  }
}

std::size_t GroupElement::hash() const noexcept { return hash_code(code()); }

std::size_t hash_code(std::span<const std::int64_t> code) noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ code.size();
  for (std::int64_t v : code) {
    std::uint64_t x = static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 29;
    h ^= x;
  }
  return static_cast<std::size_t>(h);
}

std::strong_ordering operator<=>(const GroupElement& a, const GroupElement& b) noexcept {
  return std::lexicographical_compare_three_way(a.code_.begin(), a.code_.end(), b.code_.begin(),
                                                b.code_.end());
}

Group::Group(GroupSpec spec)
    : spec_(std::move(spec)), tag_(static_cast<std::int64_t>(spec_.digest() >> 1)) {}

GroupElement Group::multiply(const GroupElement& a, const GroupElement& b) const {
  check_operand(a);
  check_operand(b);
  return multiply_impl(a, b);
}

void Group::multiply_into(const GroupElement& a, const GroupElement& b, GroupElement::Code& out) const {
  check_operand(a);
  check_operand(b);
  multiply_into_impl(a, b, out);
}

void Group::multiply_into_impl(const GroupElement& a, const GroupElement& b, GroupElement::Code& out) const {
  GroupElement p = multiply_impl(a, b);
  out.assign(p.code().begin(), p.code().end());
}

GroupElement Group::inverse(const GroupElement& a) const {
  check_operand(a);
  return inverse_impl(a);
}

void Group::check_operand(const GroupElement& g) const {
  if (g.tag() != tag_)
    throw UsageError("element does not belong to group " + spec_.canonical_text());
}

void Group::set_generators(std::vector<GroupElement> gens, std::vector<std::string> names) {
  const GroupElement id = identity();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (gens[i] == id) continue;
    if (std::find(generators_.begin(), generators_.end(), gens[i]) != generators_.end()) continue;
    generators_.push_back(gens[i]);
    generator_names_.push_back(names[i]);
  }
  for (const auto& g : generators_) {
    if (std::find(generators_.begin(), generators_.end(), inverse_impl(g)) == generators_.end())
      throw UsageError("generating set is not closed under inversion");
  }
}

GroupElement Group::lamp_element(std::int64_t) const {
  throw UsageError(spec_.canonical_text() + " is not a wreath product");
}

std::vector<GroupElement> Group::base_generators() const {
  throw UsageError(spec_.canonical_text() + " is not a wreath product");
}

namespace {

class GenericWalker final : public Walker {
 public:
  GenericWalker(const Group& g, const StepMeasure& step) : group_(g), current_(g.identity()) {
    for (const auto& e : step.support()) steps_.push_back(e.element);
  }
  void reset() override { current_ = group_.identity(); }
  void step(std::size_t index) override { current_ = group_.multiply(current_, steps_[index]); }
  std::int64_t length() const override { return group_.closed_form_length(current_).value_or(-1); }
  GroupElement element() const override { return current_; }

 private:
  const Group& group_;
  std::vector<GroupElement> steps_;
  GroupElement current_;
};

}  // namespace

std::unique_ptr<Walker> Group::make_walker(const StepMeasure& step) const {
  return std::make_unique<GenericWalker>(*this, step);
}

std::shared_ptr<const Group> make_group(const GroupSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case Family::ZPowD: return detail::make_zd(spec);
    case Family::Heisenberg: return detail::make_heisenberg(spec);
    case Family::LamplighterOverZ:
    case Family::WreathZOverZ: return detail::make_lamplighter(spec);
    case Family::BaumslagSolitar: return detail::make_baumslag_solitar(spec);
    case Family::BubbleWreath: return detail::make_bubble_wreath(spec);
  }
  throw UsageError("unknown family");
}

GroupElement evaluate_word(const Group& g, std::span<const int> word) {
  GroupElement x = g.identity();
  const auto& gens = g.generators();
  for (int i : word) {
    if (i < 0 || static_cast<std::size_t>(i) >= gens.size()) throw UsageError("generator index out of range");
    x = g.multiply(x, gens[static_cast<std::size_t>(i)]);
  }
  return x;
}

}  // namespace grwalk
