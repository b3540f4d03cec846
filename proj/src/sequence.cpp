#include "salab/sequence.hpp"

#include <cmath>

namespace salab::seqs {

namespace {

double parse_arg(const std::string& name, const std::string& spec) {
  const auto pos = spec.find(':');
  if (pos == std::string::npos)
    throw std::invalid_argument("schedule '" + name + "' needs a numeric argument, e.g. '" +
                                name + ":0.5'");
  return std::stod(spec.substr(pos + 1));
}

}  // namespace

RealSeq from_name(const std::string& spec) {
  const std::string name = spec.substr(0, spec.find(':'));
  if (name == "harmonic") return harmonic();
  if (name == "harmonic1") return harmonic1();
  if (name == "invsq") return inv_square();
  if (name == "invsqrt") return inv_sqrt();
  if (name == "loginv") return log_inv();
  if (name == "one") return one();
  if (name == "zero") return zero();
  if (name == "const") return constant(parse_arg(name, spec));
  if (name == "power") return power(parse_arg(name, spec));
  if (name == "geom") return geometric(parse_arg(name, spec));
  throw std::invalid_argument("unknown schedule name '" + spec + "'");
}

}  // namespace salab::seqs
