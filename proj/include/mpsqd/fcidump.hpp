#pragma once

// FCIDUMP reader/writer and the integral container used everywhere else.
//
// File grammar (1-based orbital indices, Hartree units):
//   header   &FCI NORB=...,NELEC=...,MS2=...,  [ORBSYM=...,] [ISYM=...,]
//            terminated by "/" or "&END"; keys case-insensitive, may span lines
//   lines    value p q r s
//            p q r s all zero        -> core energy
//            r = s = 0, p q nonzero  -> one-electron h(p,q)
//            all nonzero             -> two-electron (pq|rs), chemists'
//            any other zero pattern  -> rejected
// Internally indices are 0-based and the two-electron table is stored with
// 8-fold permutational symmetry (one canonical slot per class).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mpsqd/errors.hpp"

namespace mpsqd {

// Orbital count cap: determinants are held in 64-bit masks per spin sector.
inline constexpr int kMaxOrbitals = 64;

class FermionHamiltonian {
 public:
  FermionHamiltonian() = default;

  FermionHamiltonian(int norb, int n_alpha, int n_beta) { init(norb, n_alpha, n_beta); }

  void init(int norb, int n_alpha, int n_beta) {
    if (norb < 1 || norb > kMaxOrbitals)
      throw InputError("norb must be in [1, " + std::to_string(kMaxOrbitals) + "]");
    if (n_alpha < 0 || n_alpha > norb || n_beta < 0 || n_beta > norb)
      throw InputError("electron counts must lie in [0, norb]");
    norb_ = norb;
    n_alpha_ = n_alpha;
    n_beta_ = n_beta;
    e_core_ = 0.0;
    h_.assign(static_cast<std::size_t>(norb) * norb, 0.0);
    const std::size_t t = pair_count();
    g_.assign(t * (t + 1) / 2, 0.0);
  }

  int norb() const { return norb_; }
  int n_alpha() const { return n_alpha_; }
  int n_beta() const { return n_beta_; }
  double e_core() const { return e_core_; }
  void set_e_core(double v) { e_core_ = v; }

  double one(int p, int q) const {
    check_orb(p);
    check_orb(q);
    return h_[static_cast<std::size_t>(p) * norb_ + q];
  }

  void set_one(int p, int q, double v) {
    check_orb(p);
    check_orb(q);
    h_[static_cast<std::size_t>(p) * norb_ + q] = v;
    h_[static_cast<std::size_t>(q) * norb_ + p] = v;
  }

  // Chemists' (pq|rs); any of the 8 equivalent index orders may be passed.
  double two(int p, int q, int r, int s) const { return g_[quad_index(p, q, r, s)]; }

  void set_two(int p, int q, int r, int s, double v) { g_[quad_index(p, q, r, s)] = v; }

  friend bool operator==(const FermionHamiltonian& a, const FermionHamiltonian& b) {
    return a.norb_ == b.norb_ && a.n_alpha_ == b.n_alpha_ && a.n_beta_ == b.n_beta_ &&
           a.e_core_ == b.e_core_ && a.h_ == b.h_ && a.g_ == b.g_;
  }

  std::size_t pair_count() const {
    return static_cast<std::size_t>(norb_) * (norb_ + 1) / 2;
  }

  // Canonical flattening of the 8-fold class containing (pq|rs).
  std::size_t quad_index(int p, int q, int r, int s) const {
    check_orb(p);
    check_orb(q);
    check_orb(r);
    check_orb(s);
    const std::size_t pq = pair_index(p, q);
    const std::size_t rs = pair_index(r, s);
    const std::size_t hi = std::max(pq, rs);
    const std::size_t lo = std::min(pq, rs);
    return hi * (hi + 1) / 2 + lo;
  }

  static std::size_t tri(int hi, int lo) {
    return static_cast<std::size_t>(hi) * (hi + 1) / 2 + lo;
  }

 private:
  std::size_t pair_index(int p, int q) const {
    return p >= q ? tri(p, q) : tri(q, p);
  }

  void check_orb(int p) const {
    if (p < 0 || p >= norb_) throw InputError("orbital index out of range");
  }

  int norb_ = 0;
  int n_alpha_ = 0;
  int n_beta_ = 0;
  double e_core_ = 0.0;
  std::vector<double> h_;
  std::vector<double> g_;
};

namespace detail {

inline std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

inline bool parse_i64(const std::string& tok, long long& out) {
  if (tok.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stoll(tok, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == tok.size();
}

// Accepts Fortran D exponents alongside E.
inline bool parse_f64(std::string tok, double& out) {
  for (char& c : tok)
    if (c == 'D' || c == 'd') c = 'E';
  if (tok.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(tok, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == tok.size();
}

struct HeaderFields {
  long long norb = -1;
  long long nelec = -1;
  long long ms2 = 0;
  int end_line = 0;  // line on which the header terminator appeared
};

inline HeaderFields parse_fcidump_header(std::istream& in, int& line_no) {
  HeaderFields out;
  std::string text;
  bool terminated = false;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string u = upper(line);
    const auto slash = u.find('/');
    const auto amp_end = u.find("&END");
    std::size_t stop = std::string::npos;
    if (slash != std::string::npos) stop = slash;
    if (amp_end != std::string::npos && (stop == std::string::npos || amp_end < stop))
      stop = amp_end;
    if (stop != std::string::npos) {
      text += " " + u.substr(0, stop);
      terminated = true;
      break;
    }
    text += " " + u;
  }
  if (!terminated) throw ParseError(line_no ? line_no : 1, "header not terminated by '/' or '&END'");
  out.end_line = line_no;

  auto first = text.find("&FCI");
  if (first == std::string::npos || text.find_first_not_of(" \t") != first)
    throw ParseError(1, "header must start with &FCI");
  text = text.substr(first + 4);

  for (char& c : text)
    if (c == ',' || c == '\t') c = ' ';
  // Namelists allow whitespace around '='; normalize so KEY=VALUE tokenizes.
  std::string squeezed;
  squeezed.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == ' ') {
      std::size_t j = i;
      while (j < text.size() && text[j] == ' ') ++j;
      const bool next_eq = j < text.size() && text[j] == '=';
      const bool prev_eq = !squeezed.empty() && squeezed.back() == '=';
      if (!next_eq && !prev_eq) squeezed += ' ';
      i = j - 1;
    } else {
      squeezed += text[i];
    }
  }
  std::istringstream toks(squeezed);
  std::string tok;
  std::string pending_key;  // active list key for bare continuation values
  bool seen_norb = false, seen_nelec = false, seen_ms2 = false;
  while (toks >> tok) {
    const auto eq = tok.find('=');
    std::string key, val;
    if (eq != std::string::npos) {
      key = tok.substr(0, eq);
      val = tok.substr(eq + 1);
      pending_key.clear();
    } else if (!pending_key.empty()) {
      key = pending_key;
      val = tok;
    } else {
      throw ParseError(out.end_line, "stray header token '" + tok + "'");
    }
    long long iv = 0;
    if (key == "NORB" || key == "NELEC" || key == "MS2") {
      if (!parse_i64(val, iv)) throw ParseError(out.end_line, key + " is not an integer");
      bool& seen = key == "NORB" ? seen_norb : key == "NELEC" ? seen_nelec : seen_ms2;
      long long& slot = key == "NORB" ? out.norb : key == "NELEC" ? out.nelec : out.ms2;
      if (seen && slot != iv) throw ParseError(out.end_line, "conflicting " + key + " values");
      slot = iv;
      seen = true;
    } else if (key == "ORBSYM") {
      // parsed for grammar, ignored for physics
      if (!val.empty() && !parse_i64(val, iv))
        throw ParseError(out.end_line, "ORBSYM entry is not an integer");
      pending_key = "ORBSYM";
    } else if (key == "ISYM" || key == "IUHF" || key == "UHF") {
      if (!val.empty() && !parse_i64(val, iv))
        throw ParseError(out.end_line, key + " is not an integer");
    } else {
      // unknown namelist keys are tolerated (and their list values skipped)
      pending_key = key;
    }
  }
  if (!seen_norb) throw ParseError(out.end_line, "header missing NORB");
  if (!seen_nelec) throw ParseError(out.end_line, "header missing NELEC");
  return out;
}

}  // namespace detail

inline FermionHamiltonian parse_fcidump(std::istream& in) {
  int line_no = 0;
  const auto hdr = detail::parse_fcidump_header(in, line_no);

  if (hdr.norb < 1 || hdr.norb > kMaxOrbitals)
    throw ParseError(hdr.end_line, "NORB out of supported range [1, " +
                                       std::to_string(kMaxOrbitals) + "]");
  if ((hdr.nelec + hdr.ms2) % 2 != 0)
    throw ParseError(hdr.end_line, "NELEC and MS2 have mismatched parity");
  const long long na = (hdr.nelec + hdr.ms2) / 2;
  const long long nb = (hdr.nelec - hdr.ms2) / 2;
  if (na < 0 || nb < 0 || na > hdr.norb || nb > hdr.norb)
    throw ParseError(hdr.end_line, "electron counts fall outside [0, NORB]");

  FermionHamiltonian ham(static_cast<int>(hdr.norb), static_cast<int>(na),
                         static_cast<int>(nb));
  const int norb = ham.norb();

  // Fill tracking for conflicting-duplicate detection.
  std::vector<char> h_set(ham.pair_count(), 0);
  std::vector<char> g_set(ham.pair_count() * (ham.pair_count() + 1) / 2, 0);
  bool core_set = false;
  constexpr double kDupTol = 1e-12;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream toks(line);
    std::vector<std::string> parts;
    std::string tok;
    while (toks >> tok) parts.push_back(tok);
    if (parts.empty()) continue;
    if (parts.size() != 5)
      throw ParseError(line_no, "expected 'value p q r s', got " +
                                    std::to_string(parts.size()) + " fields");
    double value = 0.0;
    if (!detail::parse_f64(parts[0], value))
      throw ParseError(line_no, "malformed value '" + parts[0] + "'");
    long long idx[4];
    for (int k = 0; k < 4; ++k) {
      if (!detail::parse_i64(parts[k + 1], idx[k]))
        throw ParseError(line_no, "malformed index '" + parts[k + 1] + "'");
      if (idx[k] < 0 || idx[k] > norb)
        throw ParseError(line_no, "index " + std::to_string(idx[k]) +
                                      " out of [0, NORB]");
    }
    const long long p = idx[0], q = idx[1], r = idx[2], s = idx[3];
    if (p == 0 && q == 0 && r == 0 && s == 0) {
      if (core_set && std::abs(ham.e_core() - value) > kDupTol)
        throw ParseError(line_no, "conflicting duplicate core energy");
      ham.set_e_core(value);
      core_set = true;
    } else if (r == 0 && s == 0 && p > 0 && q > 0) {
      const std::size_t slot =
          FermionHamiltonian::tri(static_cast<int>(std::max(p, q)) - 1,
                                  static_cast<int>(std::min(p, q)) - 1);
      if (h_set[slot] &&
          std::abs(ham.one(static_cast<int>(p) - 1, static_cast<int>(q) - 1) - value) > kDupTol)
        throw ParseError(line_no, "conflicting duplicate one-electron entry");
      ham.set_one(static_cast<int>(p) - 1, static_cast<int>(q) - 1, value);
      h_set[slot] = 1;
    } else if (p > 0 && q > 0 && r > 0 && s > 0) {
      const std::size_t slot =
          ham.quad_index(static_cast<int>(p) - 1, static_cast<int>(q) - 1,
                         static_cast<int>(r) - 1, static_cast<int>(s) - 1);
      if (g_set[slot] &&
          std::abs(ham.two(static_cast<int>(p) - 1, static_cast<int>(q) - 1,
                           static_cast<int>(r) - 1, static_cast<int>(s) - 1) -
                   value) > kDupTol)
        throw ParseError(line_no, "conflicting duplicate two-electron entry");
      ham.set_two(static_cast<int>(p) - 1, static_cast<int>(q) - 1,
                  static_cast<int>(r) - 1, static_cast<int>(s) - 1, value);
      g_set[slot] = 1;
    } else {
      throw ParseError(line_no, "unsupported index pattern");
    }
  }
  return ham;
}

inline FermionHamiltonian parse_fcidump_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open FCIDUMP file: " + path);
  return parse_fcidump(in);
}

// Canonical emission: one representative per symmetry class, 17 significant
// digits (lossless double round trip), two-electron block first, then
// one-electron, then the core line (always present).
inline void write_fcidump(const FermionHamiltonian& ham, std::ostream& out) {
  const int norb = ham.norb();
  const int nelec = ham.n_alpha() + ham.n_beta();
  const int ms2 = ham.n_alpha() - ham.n_beta();
  out << "&FCI NORB=" << norb << ",NELEC=" << nelec << ",MS2=" << ms2 << ",\n";
  out << " ORBSYM=";
  for (int i = 0; i < norb; ++i) out << "1,";
  out << "\n ISYM=1,\n&END\n";

  char buf[64];
  auto emit = [&](double v, int p, int q, int r, int s) {
    std::snprintf(buf, sizeof buf, "%24.16E %4d %4d %4d %4d\n", v, p, q, r, s);
    out << buf;
  };
  for (int p = 0; p < norb; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r <= p; ++r)
        for (int s = 0; s <= r; ++s) {
          if (FermionHamiltonian::tri(r, s) > FermionHamiltonian::tri(p, q)) continue;
          const double v = ham.two(p, q, r, s);
          if (v != 0.0) emit(v, p + 1, q + 1, r + 1, s + 1);
        }
  for (int p = 0; p < norb; ++p)
    for (int q = 0; q <= p; ++q) {
      const double v = ham.one(p, q);
      if (v != 0.0) emit(v, p + 1, q + 1, 0, 0);
    }
  emit(ham.e_core(), 0, 0, 0, 0);
}

inline std::string write_fcidump_string(const FermionHamiltonian& ham) {
  std::ostringstream out;
  write_fcidump(ham, out);
  return out.str();
}

// 1D Hubbard chain with open boundaries: nearest-neighbour hopping -t and
// on-site repulsion U.
inline FermionHamiltonian make_hubbard_chain(int sites, double u, double t,
                                             int n_alpha, int n_beta) {
  if (sites < 2) throw InputError("hubbard chain needs at least 2 sites");
  FermionHamiltonian ham(sites, n_alpha, n_beta);
  for (int i = 0; i + 1 < sites; ++i) ham.set_one(i, i + 1, -t);
  for (int i = 0; i < sites; ++i) ham.set_two(i, i, i, i, u);
  return ham;
}

}  // namespace mpsqd
