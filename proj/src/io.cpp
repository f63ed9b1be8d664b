#include "specdet/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace specdet {

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string to_string(EigenvalueClass cls) {
  switch (cls) {
    case EigenvalueClass::Upper:
      return "upper";
    case EigenvalueClass::Lower:
      return "lower";
    case EigenvalueClass::RealPositive:
      return "real_positive";
    case EigenvalueClass::RealNegative:
      return "real_negative";
  }
  return "unknown";
}

EigenvalueClass eigenvalue_class_from_string(const std::string& s) {
  if (s == "upper") return EigenvalueClass::Upper;
  if (s == "lower") return EigenvalueClass::Lower;
  if (s == "real_positive") return EigenvalueClass::RealPositive;
  if (s == "real_negative") return EigenvalueClass::RealNegative;
  throw std::invalid_argument("unknown eigenvalue class: " + s);
}

// ---------------------------------------------------------------------------
// JsonWriter
// ---------------------------------------------------------------------------

void JsonWriter::separate() {
  if (!has_item_.empty()) {
    if (has_item_.back()) out_ += ',';
    has_item_.back() = true;
  }
}

JsonWriter& JsonWriter::begin_object() {
  separate();
  out_ += '{';
  has_item_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  has_item_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separate();
  out_ += '[';
  has_item_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  has_item_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
  separate();
  out_ += '"';
  out_ += k;
  out_ += "\":";
  if (!has_item_.empty()) has_item_.back() = false;  // value follows
  return *this;
}

JsonWriter& JsonWriter::number(double v) {
  separate();
  out_ += format_17(v);
  return *this;
}

JsonWriter& JsonWriter::integer(long long v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::string(const std::string& s) {
  separate();
  out_ += '"';
  for (char c : s) {
    if (c == '"' || c == '\\') out_ += '\\';
    out_ += c;
  }
  out_ += '"';
  return *this;
}

JsonWriter& JsonWriter::boolean(bool b) {
  separate();
  out_ += b ? "true" : "false";
  return *this;
}

// ---------------------------------------------------------------------------
// Spectrum serialization
// ---------------------------------------------------------------------------

std::string spectrum_to_csv(const Spectrum& spectrum) {
  std::string out = "j,re,im,class,multiplicity,residual\n";
  int j = 0;
  for (const auto& rec : spectrum.records) {
    out += std::to_string(++j);
    out += ',';
    out += format_shortest(rec.value.real());
    out += ',';
    out += format_shortest(rec.value.imag());
    out += ',';
    out += to_string(rec.cls);
    out += ',';
    out += std::to_string(rec.multiplicity);
    out += ',';
    out += format_shortest(rec.residual);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number in CSV: " + s);
  }
  return v;
}

}  // namespace

Spectrum spectrum_from_csv(const std::string& text, double strip_height) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "j,re,im,class,multiplicity,residual") {
    throw std::invalid_argument("spectrum CSV: bad header");
  }
  Spectrum sp;
  sp.strip_height = strip_height;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw std::invalid_argument("spectrum CSV: bad row");
    EigenvalueRecord rec;
    rec.value = Complex(parse_double(f[1]), parse_double(f[2]));
    rec.cls = eigenvalue_class_from_string(f[3]);
    rec.multiplicity = static_cast<int>(parse_double(f[4]));
    rec.residual = parse_double(f[5]);
    sp.records.push_back(rec);
    if (rec.cls == EigenvalueClass::RealPositive) sp.card_I1 += rec.multiplicity;
    if (rec.cls == EigenvalueClass::RealNegative) sp.card_I2 += rec.multiplicity;
  }
  return sp;
}

std::string spectrum_to_json(const Spectrum& spectrum) {
  JsonWriter w;
  w.begin_object();
  w.key("strip_height").number(spectrum.strip_height);
  w.key("card_I1").integer(spectrum.card_I1);
  w.key("card_I2").integer(spectrum.card_I2);
  w.key("records").begin_array();
  int j = 0;
  for (const auto& rec : spectrum.records) {
    w.begin_object();
    w.key("j").integer(++j);
    w.key("re").number(rec.value.real());
    w.key("im").number(rec.value.imag());
    w.key("class").string(to_string(rec.cls));
    w.key("multiplicity").integer(rec.multiplicity);
    w.key("residual").number(rec.residual);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

std::string residuals_to_csv(const std::vector<AsymptoticResidualRow>& rows) {
  std::string out = "j,re_residual,im_residual,ambiguous\n";
  for (const auto& r : rows) {
    out += std::to_string(r.j);
    out += ',';
    out += format_shortest(r.re_residual);
    out += ',';
    out += format_shortest(r.im_residual);
    out += ',';
    out += r.ambiguous ? "1" : "0";
    out += '\n';
  }
  return out;
}

void write_determinant_result(JsonWriter& w, const DeterminantResult& result) {
  w.begin_object();
  w.key("value_re").number(result.value.real());
  w.key("value_im").number(result.value.imag());
  w.key("method").string(to_string(result.method));
  w.key("cut").string(to_string(result.cut.convention));
  w.key("epsilon").number(result.cut.epsilon);
  w.key("diagnostics").begin_object();
  for (const auto& [k, v] : result.diagnostics) {
    w.key(k).number(v);
  }
  w.end_object();
  w.end_object();
}

std::string determinant_result_to_json(const DeterminantResult& result) {
  JsonWriter w;
  write_determinant_result(w, result);
  return w.str() + "\n";
}

std::string bfk_report_to_json(const BFKRunReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("K_theta_re").number(report.k_theta.real());
  w.key("K_theta_im").number(report.k_theta.imag());
  w.key("trace_factor_re").number(report.trace_factor.real());
  w.key("trace_factor_im").number(report.trace_factor.imag());
  w.key("det_BYC_re").number(report.det_byc.real());
  w.key("det_BYC_im").number(report.det_byc.imag());
  w.key("determinant_re").number(report.determinant.real());
  w.key("determinant_im").number(report.determinant.imag());
  w.key("theta").number(report.theta);
  w.key("profile_hash").string(report.profile_hash);
  w.end_object();
  return w.str() + "\n";
}

std::string profile_canonical_json(const CoefficientProfile& profile) {
  JsonWriter w;
  w.begin_object();
  switch (profile.kind()) {
    case CoefficientProfile::Kind::Constant:
      w.key("kind").string("constant");
      w.key("value").number(profile.constant_value());
      w.key("T").number(profile.domain_length());
      break;
    case CoefficientProfile::Kind::Polynomial:
      w.key("kind").string("polynomial");
      w.key("coefficients").begin_array();
      for (double c : profile.coefficients()) w.number(c);
      w.end_array();
      w.key("T").number(profile.domain_length());
      break;
    case CoefficientProfile::Kind::Trigonometric:
      w.key("kind").string("trig");
      w.key("terms").begin_array();
      for (const auto& t : profile.terms()) {
        w.begin_array();
        w.number(t.amplitude).number(t.frequency).number(t.phase);
        w.end_array();
      }
      w.end_array();
      w.key("T").number(profile.domain_length());
      break;
    case CoefficientProfile::Kind::Sampled:
      w.key("kind").string("sampled");
      w.key("xs").begin_array();
      for (double x : profile.abscissae()) w.number(x);
      w.end_array();
      w.key("ys").begin_array();
      for (double y : profile.ordinates()) w.number(y);
      w.end_array();
      break;
  }
  w.end_object();
  return w.str();
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string profile_hash(const CoefficientProfile& profile) {
  return fnv1a_hex(profile_canonical_json(profile));
}

}  // namespace specdet
