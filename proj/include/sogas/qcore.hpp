#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace sogas {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 26;

struct RegisterSpec {
  std::string name;
  int width = 0;
};

// Ordered map of named registers onto contiguous qubit ranges.
// Qubit 0 is the least significant bit of a basis index; the first
// register in the list occupies the lowest qubits.
class QubitLayout {
public:
  QubitLayout() = default;
  explicit QubitLayout(std::vector<RegisterSpec> regs);

  int total_qubits() const { return total_; }
  bool has(const std::string& name) const;
  int base(const std::string& name) const;
  int width(const std::string& name) const;
  std::uint64_t register_value(std::uint64_t basis_index, const std::string& name) const;
  const std::vector<RegisterSpec>& registers() const { return regs_; }

private:
  const RegisterSpec& find(const std::string& name) const;
  std::vector<RegisterSpec> regs_;
  std::vector<int> bases_;
  int total_ = 0;
};

// Single-target gate with optional control qubits. Controls require the
// control bit to be 1; callers wrap anti-controls in X gates.
struct Gate {
  enum class Kind { H, X, Z, RY, Phase, Custom, PhaseFlip };

  Kind kind = Kind::X;
  int target = -1;
  double angle = 0.0;
  cplx m00, m01, m10, m11;  // Custom only, validated unitary
  std::vector<int> controls;
  std::function<bool(std::uint64_t)> predicate;  // PhaseFlip: basis indices to negate

  static Gate h(int q);
  static Gate x(int q);
  static Gate z(int q);
  static Gate ry(int q, double theta);
  static Gate phase(int q, double theta);
  static Gate custom(int q, cplx a, cplx b, cplx c, cplx d);
  static Gate phase_flip(std::function<bool(std::uint64_t)> pred);

  Gate controlled(const std::vector<int>& control_qubits) const;
  Gate inverse() const;
};

class StateVector {
public:
  explicit StateVector(QubitLayout layout);

  const QubitLayout& layout() const { return layout_; }
  std::vector<cplx>& amps() { return amps_; }
  const std::vector<cplx>& amps() const { return amps_; }
  std::size_t dim() const { return amps_.size(); }

  double norm() const;
  void require_normalized(double tol = 1e-10) const;

private:
  QubitLayout layout_;
  std::vector<cplx> amps_;
};

void apply_gate(StateVector& state, const Gate& gate);

// Fresh all-zeros state with H applied to every qubit of one register.
StateVector uniform_superposition(const QubitLayout& layout, const std::string& reg);

// Inversion about the mean restricted to one register's subspace.
void grover_diffusion(StateVector& state, const std::string& reg);

// Samples a value of the register, collapses the state, returns the value.
std::uint64_t measure_register(StateVector& state, const std::string& reg, std::mt19937_64& rng);

double subspace_probability(const StateVector& state, const std::string& reg,
                            const std::function<bool(std::uint64_t)>& value_pred);

// One line per basis state: index<TAB>re<TAB>im.
void dump_amplitudes(const StateVector& state, std::ostream& os);

}  // namespace sogas
