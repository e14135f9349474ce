#include "qas/qsim.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qas {

namespace {

constexpr Complex kI{0.0, 1.0};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

int log2_exact(std::size_t n) {
    int k = 0;
    while ((std::size_t{1} << k) < n) ++k;
    return k;
}

void check_qubit(int qubit, int n_qubits) {
    if (qubit < 0 || qubit >= n_qubits) {
        throw std::out_of_range("qubit index " + std::to_string(qubit) +
                                " out of range for " +
                                std::to_string(n_qubits) + " qubits");
    }
}

void check_gate_qubits(const GateKind& gate, std::span<const int> qubits,
                       int n_qubits) {
    if (static_cast<int>(qubits.size()) != gate.arity()) {
        throw std::invalid_argument(gate.name() + " expects " +
                                    std::to_string(gate.arity()) +
                                    " qubit index(es), got " +
                                    std::to_string(qubits.size()));
    }
    for (int q : qubits) check_qubit(q, n_qubits);
    if (gate.arity() == 2 && qubits[0] == qubits[1]) {
        throw std::invalid_argument("CNOT control and target must differ");
    }
}

// Applies a 2x2 matrix to bit `bit` of every index of `amps`.
void apply_matrix2(std::span<Complex> amps, int bit, const Matrix2& m) {
    const std::size_t stride = std::size_t{1} << bit;
    for (std::size_t base = 0; base < amps.size(); base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = amps[i];
            const Complex a1 = amps[i + stride];
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[i + stride] = m[2] * a0 + m[3] * a1;
        }
    }
}

void apply_cnot_bits(std::span<Complex> amps, int control_bit,
                     int target_bit) {
    const std::size_t cmask = std::size_t{1} << control_bit;
    const std::size_t tmask = std::size_t{1} << target_bit;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & cmask) && !(i & tmask)) std::swap(amps[i], amps[i | tmask]);
    }
}

Matrix2 conj(const Matrix2& m) {
    return {std::conj(m[0]), std::conj(m[1]), std::conj(m[2]),
            std::conj(m[3])};
}

const std::array<Matrix2, 4>& pauli_basis() {
    static const std::array<Matrix2, 4> basis = {{
        {1.0, 0.0, 0.0, 1.0},
        {0.0, 1.0, 1.0, 0.0},
        {0.0, -kI, kI, 0.0},
        {1.0, 0.0, 0.0, -1.0},
    }};
    return basis;
}

// A density matrix stored row-major is a vector on 2n qubits whose low n bits
// index the column and high n bits index the row. U rho U^dag is U on the row
// bit and conj(U) on the column bit.
void conjugate_by(std::vector<Complex>& rho, int n_qubits, int qubit,
                  const Matrix2& m) {
    apply_matrix2(rho, qubit + n_qubits, m);
    apply_matrix2(rho, qubit, conj(m));
}

}  // namespace

char axis_name(Axis axis) {
    switch (axis) {
        case Axis::X: return 'X';
        case Axis::Y: return 'Y';
        case Axis::Z: return 'Z';
    }
    throw std::invalid_argument("invalid axis");
}

std::string GateKind::name() const {
    switch (type) {
        case Type::PhaseRot: return "U";
        case Type::PauliX: return "X";
        case Type::PauliY: return "Y";
        case Type::PauliZ: return "Z";
        case Type::Hadamard: return "H";
        case Type::Cnot: return "CNOT";
    }
    return "?";
}

Matrix2 single_qubit_matrix(const GateKind& gate) {
    const double r = (1.0 / std::numbers::sqrt2);
    switch (gate.type) {
        case GateKind::Type::PhaseRot:
            return {1.0, 0.0, 0.0, std::polar(1.0, gate.angle)};
        case GateKind::Type::PauliX: return pauli_basis()[1];
        case GateKind::Type::PauliY: return pauli_basis()[2];
        case GateKind::Type::PauliZ: return pauli_basis()[3];
        case GateKind::Type::Hadamard: return {r, r, r, -r};
        case GateKind::Type::Cnot: break;
    }
    throw std::invalid_argument("CNOT is not a single-qubit gate");
}

std::vector<Complex> gate_unitary(const GateKind& gate) {
    if (gate.arity() == 1) {
        const Matrix2 m = single_qubit_matrix(gate);
        return {m.begin(), m.end()};
    }
    // Columns are images of basis states; |c=1,t=0> (1) <-> |c=1,t=1> (3).
    std::vector<Complex> u(16, 0.0);
    u[0 * 4 + 0] = 1.0;
    u[2 * 4 + 2] = 1.0;
    u[3 * 4 + 1] = 1.0;
    u[1 * 4 + 3] = 1.0;
    return u;
}

void NoiseSpec::validate() const {
    if (!(p_gate >= 0.0 && p_gate <= 1.0)) {
        throw std::invalid_argument("p_gate must lie in [0, 1]");
    }
    if (!(p_meas >= 0.0 && p_meas <= 1.0)) {
        throw std::invalid_argument("p_meas must lie in [0, 1]");
    }
}

// --- PureState ---------------------------------------------------------------

PureState::PureState(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 30) {
        throw std::invalid_argument("n_qubits must be in [1, 30]");
    }
    amplitudes_.assign(std::size_t{1} << n_qubits, 0.0);
    amplitudes_[0] = 1.0;
}

PureState::PureState(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {}

PureState PureState::from_amplitudes(std::vector<Complex> amplitudes,
                                     double norm_tol) {
    if (amplitudes.size() < 2 || !is_power_of_two(amplitudes.size())) {
        throw std::invalid_argument(
            "amplitude count must be a power of two >= 2, got " +
            std::to_string(amplitudes.size()));
    }
    const int n_qubits = log2_exact(amplitudes.size());
    PureState s(n_qubits, std::move(amplitudes));
    const double norm = s.norm_squared();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > norm_tol) {
        std::ostringstream msg;
        msg << "state is not normalized: sum |a_i|^2 = " << norm;
        throw std::invalid_argument(msg.str());
    }
    return s;
}

double PureState::norm_squared() const {
    double total = 0.0;
    for (const auto& a : amplitudes_) total += std::norm(a);
    return total;
}

PureState apply_gate(const PureState& state, const GateKind& gate,
                     std::span<const int> qubits) {
    check_gate_qubits(gate, qubits, state.n_qubits());
    std::vector<Complex> amps(state.amplitudes_);
    if (gate.type == GateKind::Type::Cnot) {
        apply_cnot_bits(amps, qubits[0], qubits[1]);
    } else {
        apply_matrix2(amps, qubits[0], single_qubit_matrix(gate));
    }
    return PureState(state.n_qubits(), std::move(amps));
}

// --- MixedState --------------------------------------------------------------

MixedState::MixedState(int n_qubits) : MixedState(PureState(n_qubits)) {}

MixedState::MixedState(const PureState& pure) : n_qubits_(pure.n_qubits()) {
    const std::size_t d = pure.dim();
    rho_.resize(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            rho_[i * d + j] = pure[i] * std::conj(pure[j]);
        }
    }
}

MixedState::MixedState(int n_qubits, std::vector<Complex> rho)
    : n_qubits_(n_qubits), rho_(std::move(rho)) {}

MixedState MixedState::from_matrix(int n_qubits, std::vector<Complex> rho) {
    if (n_qubits < 1 || n_qubits > 15) {
        throw std::invalid_argument("n_qubits must be in [1, 15]");
    }
    const std::size_t d = std::size_t{1} << n_qubits;
    if (rho.size() != d * d) {
        throw std::invalid_argument("density matrix must have 4^n entries");
    }
    return MixedState(n_qubits, std::move(rho));
}

MixedState MixedState::maximally_mixed(int n_qubits) {
    MixedState m(n_qubits);
    const std::size_t d = m.dim();
    std::fill(m.rho_.begin(), m.rho_.end(), Complex{});
    for (std::size_t i = 0; i < d; ++i) m.rho_[i * d + i] = 1.0 / double(d);
    return m;
}

Complex MixedState::trace() const {
    Complex t = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) t += (*this)(i, i);
    return t;
}

bool MixedState::is_valid_density(double tol) const {
    const Complex tr = trace();
    if (std::abs(tr.real() - 1.0) > tol || std::abs(tr.imag()) > tol) {
        return false;
    }
    for (std::size_t i = 0; i < dim(); ++i) {
        for (std::size_t j = i; j < dim(); ++j) {
            if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) {
                return false;
            }
        }
    }
    return true;
}

MixedState apply_gate(const MixedState& state, const GateKind& gate,
                      std::span<const int> qubits, const NoiseSpec& noise) {
    check_gate_qubits(gate, qubits, state.n_qubits());
    noise.validate();
    const int n = state.n_qubits();
    std::vector<Complex> rho(state.rho_);
    if (gate.type == GateKind::Type::Cnot) {
        apply_cnot_bits(rho, qubits[0] + n, qubits[1] + n);
        apply_cnot_bits(rho, qubits[0], qubits[1]);
    } else {
        conjugate_by(rho, n, qubits[0], single_qubit_matrix(gate));
    }
    MixedState out(n, std::move(rho));
    if (noise.p_gate > 0.0) {
        for (int q : qubits) out = depolarize(out, q, noise.p_gate);
    }
    return out;
}

std::array<Matrix2, 4> depolarizing_kraus(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("depolarizing probability must be in [0, 1]");
    }
    const double w[4] = {std::sqrt(1.0 - 0.75 * p), std::sqrt(0.25 * p),
                         std::sqrt(0.25 * p), std::sqrt(0.25 * p)};
    std::array<Matrix2, 4> kraus;
    for (int k = 0; k < 4; ++k) {
        for (int e = 0; e < 4; ++e) kraus[k][e] = w[k] * pauli_basis()[k][e];
    }
    return kraus;
}

MixedState apply_pauli_channel(const MixedState& state, int qubit,
                               std::span<const double> weights) {
    check_qubit(qubit, state.n_qubits());
    if (weights.size() != 4) {
        throw std::invalid_argument("Pauli channel needs four weights");
    }
    const int n = state.n_qubits();
    std::vector<Complex> out(state.rho_.size(), 0.0);
    for (int k = 0; k < 4; ++k) {
        if (weights[k] == 0.0) continue;
        std::vector<Complex> term(state.rho_);
        if (k != 0) conjugate_by(term, n, qubit, pauli_basis()[k]);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += weights[k] * term[i];
        }
    }
    return MixedState(n, std::move(out));
}

MixedState depolarize(const MixedState& state, int qubit, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("depolarizing probability must be in [0, 1]");
    }
    const std::array<double, 4> weights = {1.0 - 0.75 * p, 0.25 * p, 0.25 * p,
                                           0.25 * p};
    return apply_pauli_channel(state, qubit, weights);
}

// --- measurements ------------------------------------------------------------

double pauli_expectation(const PureState& state, int qubit, Axis axis) {
    check_qubit(qubit, state.n_qubits());
    axis_name(axis);  // rejects out-of-range enum values
    const std::size_t mask = std::size_t{1} << qubit;
    const auto amps = state.amplitudes();
    double value = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & mask) continue;
        const Complex a0 = amps[i];
        const Complex a1 = amps[i | mask];
        switch (axis) {
            case Axis::X: value += 2.0 * (std::conj(a0) * a1).real(); break;
            case Axis::Y: value += 2.0 * (std::conj(a0) * a1).imag(); break;
            case Axis::Z: value += std::norm(a0) - std::norm(a1); break;
        }
    }
    return std::clamp(value, -1.0, 1.0);
}

double pauli_expectation(const MixedState& state, int qubit, Axis axis) {
    check_qubit(qubit, state.n_qubits());
    axis_name(axis);  // rejects out-of-range enum values
    const std::size_t mask = std::size_t{1} << qubit;
    double value = 0.0;
    // Tr(rho sigma) over the 2x2 blocks spanned by bit `qubit`.
    for (std::size_t i = 0; i < state.dim(); ++i) {
        if (i & mask) continue;
        const std::size_t j = i | mask;
        switch (axis) {
            case Axis::X: value += 2.0 * state(j, i).real(); break;
            case Axis::Y: value += 2.0 * state(j, i).imag(); break;
            case Axis::Z: value += state(i, i).real() - state(j, j).real(); break;
        }
    }
    return std::clamp(value, -1.0, 1.0);
}

double readout_damped_expectation(double true_value, double p_meas) {
    return (1.0 - 2.0 * p_meas) * true_value;
}

double sampled_expectation(double true_value, double p_meas, int shots,
                           std::mt19937_64& rng) {
    if (shots <= 0) throw std::invalid_argument("shots must be positive");
    const double mean = readout_damped_expectation(true_value, p_meas);
    const double p_plus = std::clamp(0.5 * (1.0 + mean), 0.0, 1.0);
    std::binomial_distribution<int> draw(shots, p_plus);
    const int plus = draw(rng);
    return (2.0 * plus - shots) / shots;
}

double fidelity(const PureState& state, const PureState& target) {
    if (state.dim() != target.dim()) {
        throw std::invalid_argument("fidelity: qubit count mismatch");
    }
    Complex overlap = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
        overlap += std::conj(target[i]) * state[i];
    }
    return std::clamp(std::norm(overlap), 0.0, 1.0);
}

double fidelity(const MixedState& state, const PureState& target) {
    if (state.dim() != target.dim()) {
        throw std::invalid_argument("fidelity: qubit count mismatch");
    }
    Complex value = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
        Complex row = 0.0;
        for (std::size_t j = 0; j < state.dim(); ++j) {
            row += state(i, j) * target[j];
        }
        value += std::conj(target[i]) * row;
    }
    return std::clamp(value.real(), 0.0, 1.0);
}

// --- tomography --------------------------------------------------------------

namespace {

int pauli_index(char c) {
    switch (c) {
        case 'I': return 0;
        case 'X': return 1;
        case 'Y': return 2;
        case 'Z': return 3;
    }
    throw std::invalid_argument(std::string("invalid Pauli character '") + c +
                                "'");
}

// P|i> = phase(i) |i ^ flip>.
struct PauliAction {
    std::size_t flip = 0;
    std::vector<int> codes;

    Complex phase(std::size_t i) const {
        Complex ph = 1.0;
        for (std::size_t q = 0; q < codes.size(); ++q) {
            const bool bit = (i >> q) & 1;
            switch (codes[q]) {
                case 2: ph *= bit ? -kI : kI; break;
                case 3: if (bit) ph = -ph; break;
                default: break;
            }
        }
        return ph;
    }
};

PauliAction pauli_action(const std::string& pauli) {
    PauliAction act;
    for (std::size_t q = 0; q < pauli.size(); ++q) {
        const int code = pauli_index(pauli[q]);
        act.codes.push_back(code);
        if (code == 1 || code == 2) act.flip |= std::size_t{1} << q;
    }
    return act;
}

}  // namespace

double pauli_string_expectation(const MixedState& state,
                                const std::string& pauli) {
    if (static_cast<int>(pauli.size()) != state.n_qubits()) {
        throw std::invalid_argument("Pauli string length must equal n_qubits");
    }
    const PauliAction act = pauli_action(pauli);
    // Tr(rho P) = sum_i <i|rho P|i> = sum_i phase(i) rho(i, i ^ flip).
    Complex value = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
        value += act.phase(i) * state(i, i ^ act.flip);
    }
    return value.real();
}

std::vector<std::string> non_identity_pauli_strings(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxTomographyQubits) {
        throw std::invalid_argument("tomography supports 1 to " +
                                    std::to_string(kMaxTomographyQubits) +
                                    " qubits");
    }
    const std::size_t count = std::size_t{1} << (2 * n_qubits);
    std::vector<std::string> out;
    out.reserve(count - 1);
    for (std::size_t code = 1; code < count; ++code) {
        std::string s(n_qubits, 'I');
        for (int q = 0; q < n_qubits; ++q) s[q] = "IXYZ"[(code >> (2 * q)) & 3];
        out.push_back(std::move(s));
    }
    return out;
}

std::map<std::string, double> pauli_expectations(const MixedState& state) {
    std::map<std::string, double> out;
    for (auto& p : non_identity_pauli_strings(state.n_qubits())) {
        const double v = pauli_string_expectation(state, p);
        out.emplace(std::move(p), v);
    }
    return out;
}

MixedState tomography_reconstruct(
    const std::map<std::string, double>& expectations, int n_qubits) {
    if (n_qubits > kMaxTomographyQubits) {
        throw std::invalid_argument(
            "tomography reconstruction is limited to " +
            std::to_string(kMaxTomographyQubits) + " qubits");
    }
    const auto strings = non_identity_pauli_strings(n_qubits);
    const std::size_t d = std::size_t{1} << n_qubits;
    std::vector<Complex> rho(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) rho[i * d + i] = 1.0 / double(d);
    for (const auto& p : strings) {
        auto it = expectations.find(p);
        if (it == expectations.end()) {
            throw std::invalid_argument("missing expectation for Pauli string " +
                                        p);
        }
        const double coeff = it->second / double(d);
        const PauliAction act = pauli_action(p);
        for (std::size_t i = 0; i < d; ++i) {
            rho[(i ^ act.flip) * d + i] += coeff * act.phase(i);
        }
    }
    return MixedState::from_matrix(n_qubits, std::move(rho));
}

// --- targets -----------------------------------------------------------------

PureState ghz_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 30) {
        throw std::invalid_argument("n_qubits must be in [1, 30]");
    }
    std::vector<Complex> amps(std::size_t{1} << n_qubits, 0.0);
    amps.front() = (1.0 / std::numbers::sqrt2);
    amps.back() = (1.0 / std::numbers::sqrt2);
    return PureState::from_amplitudes(std::move(amps));
}

PureState parse_target_amplitudes(const std::string& text) {
    std::istringstream in(text);
    std::vector<Complex> amps;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        double re = 0.0;
        double im = 0.0;
        std::string extra;
        if (!(fields >> re >> im) || (fields >> extra)) {
            throw std::invalid_argument("target line " + std::to_string(line_no) +
                                        ": expected \"re im\"");
        }
        amps.emplace_back(re, im);
    }
    return PureState::from_amplitudes(std::move(amps), 1e-6);
}

PureState load_target_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open target file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_target_amplitudes(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

}  // namespace qas
