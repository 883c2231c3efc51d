#include "sogas/qcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace sogas {

namespace {

const char* kAllowedNames[] = {"X", "XI", "Y", "A", "P", "F", "ANC"};

bool name_allowed(const std::string& name) {
  for (const char* s : kAllowedNames)
    if (name == s) return true;
  return false;
}

std::array<cplx, 4> gate_matrix_of(const Gate& g) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  switch (g.kind) {
    case Gate::Kind::H:
      return {inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2};
    case Gate::Kind::X:
      return {0.0, 1.0, 1.0, 0.0};
    case Gate::Kind::Z:
      return {1.0, 0.0, 0.0, -1.0};
    case Gate::Kind::RY: {
      double c = std::cos(g.angle / 2.0), s = std::sin(g.angle / 2.0);
      return {c, -s, s, c};
    }
    case Gate::Kind::Phase:
      return {1.0, 0.0, 0.0, std::polar(1.0, g.angle)};
    case Gate::Kind::Custom:
      return {g.m00, g.m01, g.m10, g.m11};
    default:
      throw std::logic_error("gate has no 2x2 matrix");
  }
}

void require_unitary_2x2(cplx a, cplx b, cplx c, cplx d) {
  double r0 = std::norm(a) + std::norm(b);
  double r1 = std::norm(c) + std::norm(d);
  double cross = std::abs(a * std::conj(c) + b * std::conj(d));
  if (std::abs(r0 - 1.0) > 1e-12 || std::abs(r1 - 1.0) > 1e-12 || cross > 1e-12)
    throw std::invalid_argument("custom gate matrix is not unitary");
}

}  // namespace

QubitLayout::QubitLayout(std::vector<RegisterSpec> regs) : regs_(std::move(regs)) {
  bases_.reserve(regs_.size());
  for (const auto& r : regs_) {
    if (!name_allowed(r.name)) throw std::invalid_argument("unknown register name: " + r.name);
    if (r.width <= 0) throw std::invalid_argument("register width must be positive");
    for (const auto& other : regs_) {
      if (&other == &r) break;
      if (other.name == r.name) throw std::invalid_argument("duplicate register: " + r.name);
    }
    bases_.push_back(total_);
    total_ += r.width;
  }
  if (total_ > kMaxQubits) throw std::invalid_argument("layout exceeds the qubit budget");
}

bool QubitLayout::has(const std::string& name) const {
  for (const auto& r : regs_)
    if (r.name == name) return true;
  return false;
}

const RegisterSpec& QubitLayout::find(const std::string& name) const {
  for (std::size_t i = 0; i < regs_.size(); ++i)
    if (regs_[i].name == name) return regs_[i];
  throw std::invalid_argument("no register named " + name);
}

int QubitLayout::base(const std::string& name) const {
  for (std::size_t i = 0; i < regs_.size(); ++i)
    if (regs_[i].name == name) return bases_[i];
  throw std::invalid_argument("no register named " + name);
}

int QubitLayout::width(const std::string& name) const { return find(name).width; }

std::uint64_t QubitLayout::register_value(std::uint64_t basis_index,
                                          const std::string& name) const {
  int b = base(name);
  int w = width(name);
  return (basis_index >> b) & ((std::uint64_t{1} << w) - 1);
}

Gate Gate::h(int q) {
  Gate g;
  g.kind = Kind::H;
  g.target = q;
  return g;
}

Gate Gate::x(int q) {
  Gate g;
  g.kind = Kind::X;
  g.target = q;
  return g;
}

Gate Gate::z(int q) {
  Gate g;
  g.kind = Kind::Z;
  g.target = q;
  return g;
}

Gate Gate::ry(int q, double theta) {
  Gate g;
  g.kind = Kind::RY;
  g.target = q;
  g.angle = theta;
  return g;
}

Gate Gate::phase(int q, double theta) {
  Gate g;
  g.kind = Kind::Phase;
  g.target = q;
  g.angle = theta;
  return g;
}

Gate Gate::custom(int q, cplx a, cplx b, cplx c, cplx d) {
  require_unitary_2x2(a, b, c, d);
  Gate g;
  g.kind = Kind::Custom;
  g.target = q;
  g.m00 = a;
  g.m01 = b;
  g.m10 = c;
  g.m11 = d;
  return g;
}

Gate Gate::phase_flip(std::function<bool(std::uint64_t)> pred) {
  Gate g;
  g.kind = Kind::PhaseFlip;
  g.target = -1;
  g.predicate = std::move(pred);
  return g;
}

Gate Gate::controlled(const std::vector<int>& control_qubits) const {
  Gate g = *this;
  g.controls.insert(g.controls.end(), control_qubits.begin(), control_qubits.end());
  return g;
}

Gate Gate::inverse() const {
  Gate g = *this;
  switch (kind) {
    case Kind::H:
    case Kind::X:
    case Kind::Z:
    case Kind::PhaseFlip:
      break;
    case Kind::RY:
    case Kind::Phase:
      g.angle = -angle;
      break;
    case Kind::Custom:
      g.m00 = std::conj(m00);
      g.m01 = std::conj(m10);
      g.m10 = std::conj(m01);
      g.m11 = std::conj(m11);
      break;
  }
  return g;
}

StateVector::StateVector(QubitLayout layout)
    : layout_(std::move(layout)), amps_(std::size_t{1} << layout_.total_qubits()) {
  amps_[0] = 1.0;
}

double StateVector::norm() const {
  double acc = 0.0;
  for (const cplx& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

void StateVector::require_normalized(double tol) const {
  if (std::abs(norm() - 1.0) > tol)
    throw std::logic_error("state vector lost normalization");
}

void apply_gate(StateVector& state, const Gate& gate) {
  const int n = state.layout().total_qubits();
  if (gate.kind != Gate::Kind::PhaseFlip) {
    if (gate.target < 0 || gate.target >= n)
      throw std::out_of_range("gate target out of range");
  }
  std::uint64_t cmask = 0;
  for (int c : gate.controls) {
    if (c < 0 || c >= n) throw std::out_of_range("gate control out of range");
    if (c == gate.target) throw std::invalid_argument("control equals target");
    cmask |= std::uint64_t{1} << c;
  }

  auto& amps = state.amps();
  const std::uint64_t dim = amps.size();

  if (gate.kind == Gate::Kind::PhaseFlip) {
    if (!gate.predicate) throw std::invalid_argument("phase flip gate needs a predicate");
    for (std::uint64_t i = 0; i < dim; ++i) {
      if ((i & cmask) == cmask && gate.predicate(i)) amps[i] = -amps[i];
    }
    return;
  }

  const auto m = gate_matrix_of(gate);
  const std::uint64_t tmask = std::uint64_t{1} << gate.target;
  for (std::uint64_t i = 0; i < dim; ++i) {
    if (i & tmask) continue;
    if ((i & cmask) != cmask) continue;
    cplx a0 = amps[i];
    cplx a1 = amps[i | tmask];
    amps[i] = m[0] * a0 + m[1] * a1;
    amps[i | tmask] = m[2] * a0 + m[3] * a1;
  }
}

StateVector uniform_superposition(const QubitLayout& layout, const std::string& reg) {
  StateVector s(layout);
  int b = layout.base(reg);
  int w = layout.width(reg);
  for (int q = b; q < b + w; ++q) apply_gate(s, Gate::h(q));
  return s;
}

void grover_diffusion(StateVector& state, const std::string& reg) {
  const auto& layout = state.layout();
  const int b = layout.base(reg);
  const int w = layout.width(reg);
  auto& amps = state.amps();
  const std::uint64_t dim = amps.size();
  const std::uint64_t block = std::uint64_t{1} << w;
  const std::uint64_t low_mask = (std::uint64_t{1} << b) - 1;
  const std::uint64_t rest = dim >> w;
  for (std::uint64_t r = 0; r < rest; ++r) {
    std::uint64_t head = (r & low_mask) | ((r & ~low_mask) << w);
    cplx sum = 0.0;
    for (std::uint64_t v = 0; v < block; ++v) sum += amps[head | (v << b)];
    cplx twice_mean = 2.0 * sum / double(block);
    for (std::uint64_t v = 0; v < block; ++v) {
      std::uint64_t i = head | (v << b);
      amps[i] = twice_mean - amps[i];
    }
  }
}

std::uint64_t measure_register(StateVector& state, const std::string& reg,
                               std::mt19937_64& rng) {
  const auto& layout = state.layout();
  const int b = layout.base(reg);
  const int w = layout.width(reg);
  auto& amps = state.amps();
  const std::uint64_t dim = amps.size();
  const std::uint64_t vmask = (std::uint64_t{1} << w) - 1;

  std::vector<double> probs(std::size_t{1} << w, 0.0);
  for (std::uint64_t i = 0; i < dim; ++i) probs[(i >> b) & vmask] += std::norm(amps[i]);

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double u = uni(rng);
  std::uint64_t picked = 0;
  double acc = 0.0;
  bool chosen = false;
  for (std::uint64_t v = 0; v < probs.size(); ++v) {
    acc += probs[v];
    if (u < acc) {
      picked = v;
      chosen = true;
      break;
    }
  }
  if (!chosen) {
    for (std::uint64_t v = probs.size(); v-- > 0;) {
      if (probs[v] > 0.0) {
        picked = v;
        break;
      }
    }
  }

  double scale = 1.0 / std::sqrt(probs[picked]);
  for (std::uint64_t i = 0; i < dim; ++i) {
    if (((i >> b) & vmask) == picked) {
      amps[i] *= scale;
    } else {
      amps[i] = 0.0;
    }
  }
  return picked;
}

double subspace_probability(const StateVector& state, const std::string& reg,
                            const std::function<bool(std::uint64_t)>& value_pred) {
  const auto& layout = state.layout();
  const int b = layout.base(reg);
  const int w = layout.width(reg);
  const std::uint64_t vmask = (std::uint64_t{1} << w) - 1;
  const auto& amps = state.amps();
  double acc = 0.0;
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (value_pred((i >> b) & vmask)) acc += std::norm(amps[i]);
  }
  return acc;
}

void dump_amplitudes(const StateVector& state, std::ostream& os) {
  const auto& amps = state.amps();
  char buf[96];
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%llu\t%.17g\t%.17g\n",
                  static_cast<unsigned long long>(i), amps[i].real(), amps[i].imag());
    os << buf;
  }
}

}  // namespace sogas
