#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "rng.hpp"

namespace qcool {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;

inline constexpr int max_qubits = 14;

/// Signed n-qubit Pauli string. letters[0] acts on qubit 0, the most significant bit of a basis index.
class PauliString {
 public:
  PauliString() = default;

  PauliString(std::string letters, int sign = +1) : letters_(std::move(letters)), sign_(sign) {
    if (letters_.empty() || static_cast<int>(letters_.size()) > max_qubits)
      throw domain_error("pauli string length must be in [1, " + std::to_string(max_qubits) + "]");
    for (char& c : letters_) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
        throw domain_error(std::string("invalid pauli letter '") + c + "'");
    }
    if (sign_ != 1 && sign_ != -1) throw domain_error("pauli sign must be +1 or -1");
    const int n = qubits();
    for (int q = 0; q < n; ++q) {
      const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
      const char c = letters_[q];
      if (c == 'X' || c == 'Y') flip_ |= bit;
      if (c == 'Y' || c == 'Z') zmask_ |= bit;
      if (c == 'Y') ++ny_;
    }
  }

  int qubits() const { return static_cast<int>(letters_.size()); }
  const std::string& letters() const { return letters_; }
  int sign() const { return sign_; }
  bool is_identity() const { return flip_ == 0 && zmask_ == 0; }

  /// P|k> = phase(k) |k ^ flip>.
  std::uint64_t flip_mask() const { return flip_; }
  cplx phase(std::uint64_t k) const {
    // Y = iXZ, so Y|b> = i(-1)^b |b^1>.
    int minus = std::popcount(k & zmask_) & 1;
    cplx ph = minus ? cplx(-sign_, 0) : cplx(sign_, 0);
    switch (ny_ & 3) {
      case 1: return ph * cplx(0, 1);
      case 2: return -ph;
      case 3: return ph * cplx(0, -1);
      default: return ph;
    }
  }

  /// out = P in, O(2^n).
  void apply(const cvec& in, cvec& out) const {
    const auto dim = static_cast<std::uint64_t>(in.size());
    out.resize(in.size());
    for (std::uint64_t k = 0; k < dim; ++k) out[static_cast<Eigen::Index>(k ^ flip_)] = phase(k) * in[static_cast<Eigen::Index>(k)];
  }

  cvec apply(const cvec& in) const {
    cvec out;
    apply(in, out);
    return out;
  }

  bool operator==(const PauliString& o) const { return letters_ == o.letters_ && sign_ == o.sign_; }

 private:
  std::string letters_;
  int sign_ = 1;
  std::uint64_t flip_ = 0;
  std::uint64_t zmask_ = 0;
  int ny_ = 0;
};

inline cmat to_matrix(const PauliString& ps) {
  const Eigen::Index dim = Eigen::Index{1} << ps.qubits();
  cmat m = cmat::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k)
    m(static_cast<Eigen::Index>(static_cast<std::uint64_t>(k) ^ ps.flip_mask()), k) = ps.phase(static_cast<std::uint64_t>(k));
  return m;
}

struct PauliTerm {
  double coef;
  PauliString op;
};

/// Positive-weighted sum of signed Pauli strings.
class PauliSum {
 public:
  PauliSum() = default;
  explicit PauliSum(int n) : n_(n) { check_n(); }

  /// Accepts any nonzero real coefficient; a negative one is folded into the string's sign.
  void add(double coef, const PauliString& ps) {
    if (n_ == 0) {
      n_ = ps.qubits();
      check_n();
    }
    if (ps.qubits() != n_) throw dimension_error("pauli term has " + std::to_string(ps.qubits()) + " qubits, sum has " + std::to_string(n_));
    if (!std::isfinite(coef)) throw domain_error("non-finite pauli coefficient");
    if (coef == 0.0) return;
    PauliString s = coef < 0 ? PauliString(ps.letters(), -ps.sign()) : ps;
    terms_.push_back({std::abs(coef), std::move(s)});
    one_norm_ += std::abs(coef);
    cumulative_.push_back(one_norm_);
  }

  void add(double coef, const std::string& letters, int sign = +1) { add(coef, PauliString(letters, sign)); }

  int qubits() const { return n_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  const PauliTerm& operator[](std::size_t i) const { return terms_[i]; }
  double one_norm() const { return one_norm_; }

  double probability(std::size_t l) const { return terms_.at(l).coef / one_norm_; }

  /// Draw l with probability o_l / ||O||_1.
  std::size_t sample(rng_t& rng) const {
    if (terms_.empty() || !(one_norm_ > 0)) throw domain_error("cannot sample from a pauli sum with zero one-norm");
    const double u = uniform01(rng) * one_norm_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

  /// out = O in.
  cvec apply(const cvec& in) const {
    cvec out = cvec::Zero(in.size());
    cvec tmp;
    for (const auto& t : terms_) {
      t.op.apply(in, tmp);
      out += t.coef * tmp;
    }
    return out;
  }

  PauliSum operator+(const PauliSum& o) const {
    PauliSum r = *this;
    for (const auto& t : o.terms_) r.add(t.coef, t.op);
    return r;
  }

 private:
  void check_n() const {
    if (n_ < 1 || n_ > max_qubits) throw dimension_error("qubit count must be in [1, " + std::to_string(max_qubits) + "]");
  }

  int n_ = 0;
  std::vector<PauliTerm> terms_;
  std::vector<double> cumulative_;
  double one_norm_ = 0.0;
};

struct SumMatrix {
  cmat matrix;
  bool empty = false;
};

/// Dense realization. An empty sum gives the zero matrix with the flag set.
inline SumMatrix sum_to_matrix(const PauliSum& s) {
  if (s.qubits() < 1) throw dimension_error("pauli sum has no qubit count");
  const Eigen::Index dim = Eigen::Index{1} << s.qubits();
  SumMatrix r{cmat::Zero(dim, dim), s.empty()};
  for (const auto& t : s.terms()) {
    for (Eigen::Index k = 0; k < dim; ++k)
      r.matrix(static_cast<Eigen::Index>(static_cast<std::uint64_t>(k) ^ t.op.flip_mask()), k) += t.coef * t.op.phase(static_cast<std::uint64_t>(k));
  }
  return r;
}

inline std::size_t sample_pauli(const PauliSum& s, rng_t& rng) { return s.sample(rng); }

/// Parse "<coef> <letters>" lines. Blank lines and '#' comments are skipped.
inline PauliSum parse_pauli_sum(std::istream& in, int expected_qubits = 0) {
  PauliSum s;
  if (expected_qubits > 0) s = PauliSum(expected_qubits);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string coef_tok, letters, extra;
    if (!(ls >> coef_tok)) continue;
    if (!(ls >> letters)) throw parse_error("expected '<coefficient> <letters>'", lineno);
    if (ls >> extra) throw parse_error("unexpected token '" + extra + "'", lineno);
    double coef;
    std::size_t used = 0;
    try {
      coef = std::stod(coef_tok, &used);
    } catch (const std::exception&) {
      throw parse_error("bad coefficient '" + coef_tok + "'", lineno);
    }
    if (used != coef_tok.size() || !std::isfinite(coef)) throw parse_error("bad coefficient '" + coef_tok + "'", lineno);
    try {
      s.add(coef, PauliString(letters));
    } catch (const error& e) {
      throw parse_error(e.what(), lineno);
    }
  }
  if (s.qubits() == 0) throw parse_error("no pauli terms", 0);
  return s;
}

inline PauliSum parse_pauli_sum(const std::string& text, int expected_qubits = 0) {
  std::istringstream in(text);
  return parse_pauli_sum(in, expected_qubits);
}

inline std::string to_string(const PauliSum& s) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& t : s.terms()) os << (t.op.sign() < 0 ? "-" : "") << t.coef << ' ' << t.op.letters() << '\n';
  return os.str();
}

/// Pauli expansion o_l = Tr(P_l M)/2^n of a Hermitian matrix, dropping |o_l| <= tol.
inline PauliSum pauli_decompose(const cmat& m, double tol = 1e-12) {
  const Eigen::Index dim = m.rows();
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim || m.cols() != dim || n < 1 || n > max_qubits) throw dimension_error("matrix is not 2^n x 2^n");
  PauliSum s(n);
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  const std::uint64_t count = std::uint64_t{1} << (2 * n);
  std::string word(static_cast<std::size_t>(n), 'I');
  for (std::uint64_t code = 0; code < count; ++code) {
    for (int q = 0; q < n; ++q) word[static_cast<std::size_t>(q)] = letters[(code >> (2 * (n - 1 - q))) & 3];
    PauliString ps(word);
    cplx tr = 0;
    for (Eigen::Index k = 0; k < dim; ++k)
      tr += m(k, static_cast<Eigen::Index>(static_cast<std::uint64_t>(k) ^ ps.flip_mask())) * ps.phase(static_cast<std::uint64_t>(k));
    const double o = tr.real() / static_cast<double>(dim);
    if (std::abs(o) > tol) s.add(o, ps);
  }
  return s;
}

}  // namespace qcool
