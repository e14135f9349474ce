#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

/// Exact small-system quantum simulation: statevectors, density matrices,
/// the gate set used for circuit construction, depolarizing noise, Pauli
/// expectations, fidelity, and Pauli-basis tomography.
///
/// Qubit ordering is little-endian throughout: qubit q corresponds to bit q
/// of a basis-state index, so |q1 q0> = |01> is amplitude index 1.
namespace qas {

using Complex = std::complex<double>;
using Matrix2 = std::array<Complex, 4>;  // row-major 2x2

enum class Axis { X, Y, Z };

char axis_name(Axis axis);

struct GateKind {
    enum class Type { PhaseRot, PauliX, PauliY, PauliZ, Hadamard, Cnot };

    Type type = Type::PauliX;
    double angle = 0.0;  // only meaningful for PhaseRot

    static GateKind phase_rot(double theta) { return {Type::PhaseRot, theta}; }
    static GateKind x() { return {Type::PauliX, 0.0}; }
    static GateKind y() { return {Type::PauliY, 0.0}; }
    static GateKind z() { return {Type::PauliZ, 0.0}; }
    static GateKind h() { return {Type::Hadamard, 0.0}; }
    static GateKind cnot() { return {Type::Cnot, 0.0}; }

    int arity() const { return type == Type::Cnot ? 2 : 1; }
    std::string name() const;

    bool operator==(const GateKind&) const = default;
};

/// The 2x2 unitary of a single-qubit gate. Throws for Cnot.
Matrix2 single_qubit_matrix(const GateKind& gate);

/// Row-major unitary on the gate's own qubits: 2x2 for single-qubit gates,
/// 4x4 for Cnot with local index = control_bit + 2 * target_bit.
std::vector<Complex> gate_unitary(const GateKind& gate);

struct NoiseSpec {
    double p_gate = 0.0;
    double p_meas = 0.0;

    /// Throws std::invalid_argument if either probability leaves [0, 1].
    void validate() const;
    bool noiseless() const { return p_gate == 0.0 && p_meas == 0.0; }
};

class PureState {
  public:
    /// |0...0> on n qubits.
    explicit PureState(int n_qubits);

    /// Takes amplitudes verbatim; the length must be a power of two and the
    /// norm must be 1 within `norm_tol`.
    static PureState from_amplitudes(std::vector<Complex> amplitudes,
                                     double norm_tol = 1e-10);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }
    double norm_squared() const;

  private:
    PureState(int n_qubits, std::vector<Complex> amplitudes);

    int n_qubits_;
    std::vector<Complex> amplitudes_;

    friend PureState apply_gate(const PureState&, const GateKind&,
                                std::span<const int>);
};

class MixedState {
  public:
    /// |0...0><0...0| on n qubits.
    explicit MixedState(int n_qubits);
    explicit MixedState(const PureState& pure);

    /// Row-major dim x dim matrix. Checks shape only; use is_valid_density to
    /// check hermiticity and trace.
    static MixedState from_matrix(int n_qubits, std::vector<Complex> rho);
    static MixedState maximally_mixed(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return std::size_t{1} << n_qubits_; }
    const Complex& operator()(std::size_t row, std::size_t col) const {
        return rho_[row * dim() + col];
    }
    std::span<const Complex> data() const { return rho_; }
    Complex trace() const;

    /// Hermitian and unit trace within `tol`.
    bool is_valid_density(double tol = 1e-10) const;

  private:
    MixedState(int n_qubits, std::vector<Complex> rho);

    int n_qubits_;
    std::vector<Complex> rho_;

    friend MixedState apply_gate(const MixedState&, const GateKind&,
                                 std::span<const int>, const NoiseSpec&);
    friend MixedState depolarize(const MixedState&, int, double);
    friend MixedState apply_pauli_channel(const MixedState&, int,
                                          std::span<const double>);
};

/// Unitary gate action. `qubits` holds one index, or (control, target) for
/// Cnot. Throws std::out_of_range / std::invalid_argument on bad indices.
PureState apply_gate(const PureState& state, const GateKind& gate,
                     std::span<const int> qubits);

/// rho -> U rho U^dagger followed by depolarizing noise of strength
/// noise.p_gate on every qubit the gate touched (one independent channel
/// per qubit for Cnot).
MixedState apply_gate(const MixedState& state, const GateKind& gate,
                      std::span<const int> qubits,
                      const NoiseSpec& noise = {});

/// rho -> (1 - p) rho + p Tr_q(rho) (x) I/2 on `qubit`, evaluated as the
/// Kraus sum (1 - 3p/4) rho + (p/4)(X rho X + Y rho Y + Z rho Z).
MixedState depolarize(const MixedState& state, int qubit, double p);

/// Kraus operators {sqrt(1-3p/4) I, sqrt(p/4) X, sqrt(p/4) Y, sqrt(p/4) Z}.
std::array<Matrix2, 4> depolarizing_kraus(double p);

/// Weighted Pauli channel sum_k w_k P_k rho P_k with P = (I, X, Y, Z).
MixedState apply_pauli_channel(const MixedState& state, int qubit,
                               std::span<const double> weights);

double pauli_expectation(const PureState& state, int qubit, Axis axis);
double pauli_expectation(const MixedState& state, int qubit, Axis axis);

/// Expectation of a symmetric-readout-flipped +-1 observable.
double readout_damped_expectation(double true_value, double p_meas);

/// Finite-shot estimate of a +-1 observable whose damped mean is
/// readout_damped_expectation(true_value, p_meas).
double sampled_expectation(double true_value, double p_meas, int shots,
                           std::mt19937_64& rng);

double fidelity(const PureState& state, const PureState& target);
double fidelity(const MixedState& state, const PureState& target);

// --- Pauli-basis tomography -------------------------------------------------
//
// A Pauli string is written with one character per qubit from {I, X, Y, Z};
// character i acts on qubit i.

constexpr int kMaxTomographyQubits = 4;

double pauli_string_expectation(const MixedState& state,
                                const std::string& pauli);

/// All 4^n - 1 non-identity Pauli strings, in base-4 counting order with
/// qubit 0 as the fastest digit.
std::vector<std::string> non_identity_pauli_strings(int n_qubits);

std::map<std::string, double> pauli_expectations(const MixedState& state);

/// rho = 2^-n sum_P <P> P with <I...I> fixed to 1. Throws if a string is
/// missing or n exceeds kMaxTomographyQubits.
MixedState tomography_reconstruct(
    const std::map<std::string, double>& expectations, int n_qubits);

// --- target states -----------------------------------------------------------

/// (|0...0> + |1...1>)/sqrt(2); n = 2 gives the Bell state.
PureState ghz_state(int n_qubits);
inline PureState bell_state() { return ghz_state(2); }

/// One "re im" pair per line, 2^n lines, unit norm within 1e-6. Blank lines
/// and lines starting with '#' are skipped.
PureState load_target_file(const std::string& path);
PureState parse_target_amplitudes(const std::string& text);

}  // namespace qas
