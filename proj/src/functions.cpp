#include "qsfunm/functions.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "qsfunm/matrix_io.hpp"

namespace qsfunm {

void PoleSpec::validate() const {
  if (order < 1) throw InvalidArgument("pole order must be >= 1");
  if (static_cast<int>(fjDerivatives.size()) != order) {
    throw InvalidArgument("pole at " + format_complex(location) + " has order " +
                          std::to_string(order) + " but " +
                          std::to_string(fjDerivatives.size()) + " derivatives");
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_log_abs(Complex w) {
  const double a = std::abs(w);
  return a > 0.0 ? std::log(a) : -kInf;
}

std::vector<PoleSpec> no_poles(Complex, double) { return {}; }

std::map<std::string, RegisteredFunction> build_registry() {
  std::map<std::string, RegisteredFunction> reg;
  const auto entire = [](Complex) { return kInf; };

  reg["exp"] = {"exp", [](Complex z) { return std::exp(z); },
                [](Complex z) { return z.real(); }, entire, no_poles, true};

  reg["log_shift4"] = {"log_shift4", [](Complex z) { return std::log(z + 4.0); },
                       [](Complex z) { return safe_log_abs(std::log(z + 4.0)); },
                       [](Complex c) { return std::abs(c + 4.0); }, no_poles, false};

  reg["sqrt_shift4"] = {"sqrt_shift4", [](Complex z) { return std::sqrt(z + 4.0); },
                        [](Complex z) { return 0.5 * safe_log_abs(z + 4.0); },
                        [](Complex c) { return std::abs(c + 4.0); }, no_poles, false};

  // Poles at k*pi with residue factor lim (z - k pi) e^z / sin z = (-1)^k e^{k pi}.
  reg["exp_over_sin"] = {
      "exp_over_sin", [](Complex z) { return std::exp(z) / std::sin(z); },
      [](Complex z) { return z.real() - safe_log_abs(std::sin(z)); },
      [](Complex c) {
        const double k = std::round(c.real() / std::numbers::pi);
        return std::abs(c - Complex(k * std::numbers::pi, 0.0));
      },
      [](Complex c, double r) {
        std::vector<PoleSpec> out;
        const long lo = static_cast<long>(std::ceil((c.real() - r) / std::numbers::pi));
        const long hi = static_cast<long>(std::floor((c.real() + r) / std::numbers::pi));
        for (long k = lo; k <= hi; ++k) {
          const Complex zk(k * std::numbers::pi, 0.0);
          if (std::abs(zk - c) < r) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            out.push_back({zk, 1, {Complex(sign * std::exp(k * std::numbers::pi), 0.0)}});
          }
        }
        return out;
      },
      false};

  reg["inv"] = {"inv", [](Complex z) { return 1.0 / z; },
                [](Complex z) { return -safe_log_abs(z); },
                [](Complex c) { return std::abs(c); },
                [](Complex c, double r) {
                  std::vector<PoleSpec> out;
                  if (std::abs(c) < r) out.push_back({Complex(0.0), 1, {Complex(1.0)}});
                  return out;
                },
                false};

  reg["identity"] = {"identity", [](Complex z) { return z; },
                     [](Complex z) { return safe_log_abs(z); }, entire, no_poles, true};

  reg["one"] = {"one", [](Complex) { return Complex(1.0); }, [](Complex) { return 0.0; },
                entire, no_poles, true};
  return reg;
}

const std::map<std::string, RegisteredFunction>& registry() {
  static const auto reg = build_registry();
  return reg;
}

}  // namespace

const RegisteredFunction& lookup_function(const std::string& name) {
  const auto& reg = registry();
  const auto it = reg.find(name);
  if (it == reg.end()) {
    std::string known;
    for (const auto& [k, v] : reg) known += (known.empty() ? "" : ", ") + k;
    throw InvalidArgument("unknown function '" + name + "' (known: " + known + ")");
  }
  return it->second;
}

std::vector<std::string> registered_function_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

std::vector<PoleSpec> read_poles(std::istream& is) {
  std::vector<PoleSpec> out;
  std::string line;
  int lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    PoleSpec p;
    p.location = parse_complex(tok);
    std::string next;
    if (!(ls >> next)) throw InvalidInput("poles line " + std::to_string(lineNo) + ": missing order");
    if (next == "order" && !(ls >> next)) {
      throw InvalidInput("poles line " + std::to_string(lineNo) + ": missing order");
    }
    try {
      std::size_t used = 0;
      p.order = std::stoi(next, &used);
      if (used != next.size()) throw std::invalid_argument(next);
    } catch (const std::exception&) {
      throw InvalidInput("poles line " + std::to_string(lineNo) + ": bad order '" + next + "'");
    }
    while (ls >> tok) p.fjDerivatives.push_back(parse_complex(tok));
    try {
      p.validate();
    } catch (const InvalidArgument& e) {
      throw InvalidInput("poles line " + std::to_string(lineNo) + ": " + e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PoleSpec> load_poles(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open '" + path + "'");
  return read_poles(is);
}

}  // namespace qsfunm
