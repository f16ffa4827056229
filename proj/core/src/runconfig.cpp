#include "spmb/runconfig.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "spmb/errors.hpp"

namespace spmb {

namespace {

using nlohmann::json;

PotentialVariant variant_from_name(const std::string& name) {
  if (name == "shifted") return PotentialVariant::ShiftedPower;
  if (name == "soft") return PotentialVariant::SoftPower;
  if (name == "capped") return PotentialVariant::CappedPower;
  throw ConfigInvalid("potential.variant: unknown variant '" + name +
                      "' (expected shifted | soft | capped)");
}

void reject_unknown(const json& obj, const char* scope,
                    std::initializer_list<const char*> known) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigInvalid(std::string(scope) + ": unknown key '" + item.key() +
                          "'");
  }
}

double get_number(const json& obj, const char* scope, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ConfigInvalid(std::string(scope) + "." + key + ": expected a number");
  return obj[key].get<double>();
}

void validate(const RunConfig& c) {
  if (!(c.p > 1.0 && c.p < 5.0))
    throw ConfigInvalid("p: need 1 < p < 5, got " + std::to_string(c.p));
  if (!(c.potential.m > 1.5))
    throw ConfigInvalid("potential.m: need m > 3/2, got " +
                        std::to_string(c.potential.m));
  if (!(c.potential.a > 0.0))
    throw ConfigInvalid("potential.a: need a > 0");
  if (!(c.potential.cap > 0.0))
    throw ConfigInvalid("potential.cap: need cap > 0");
  if (!(c.beta > 0.0 && c.beta < c.potential.m / M_PI))
    throw ConfigInvalid("beta: need 0 < beta < m/pi = " +
                        std::to_string(c.potential.m / M_PI) + ", got " +
                        std::to_string(c.beta));
  if (c.k_list.empty()) throw ConfigInvalid("k_list: must be non-empty");
  for (int k : c.k_list)
    if (k < 2)
      throw ConfigInvalid("k_list: entries must be >= 2, got " +
                          std::to_string(k));
  if (c.r_samples < 2) throw ConfigInvalid("r_samples: need >= 2");
  if (!(c.rel_tol > 0.0 && c.rel_tol < 1.0))
    throw ConfigInvalid("rel_tol: need 0 < rel_tol < 1");
  if (c.basis.n_radial < 1) throw ConfigInvalid("basis.n_radial: need >= 1");
  if (c.basis.angular_orders.empty())
    throw ConfigInvalid("basis.angular_orders: must be non-empty");
  for (int l : c.basis.angular_orders)
    if (l < 0 || l > 2)
      throw ConfigInvalid("basis.angular_orders: entries must be in {0,1,2}");
  if (!(c.basis.support > 1.0))
    throw ConfigInvalid("basis.support: need > 1");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(std::string("config: JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigInvalid("config: top level must be an object");
  reject_unknown(doc, "config",
                 {"p", "potential", "beta", "k_list", "r_samples", "rel_tol",
                  "budget", "basis", "corrector", "cache_dir", "out_dir",
                  "seed"});
  RunConfig c;
  c.p = get_number(doc, "config", "p", c.p);
  if (doc.contains("potential")) {
    const json& pot = doc["potential"];
    if (!pot.is_object())
      throw ConfigInvalid("potential: expected an object");
    reject_unknown(pot, "potential", {"variant", "a", "m", "cap"});
    if (pot.contains("variant")) {
      if (!pot["variant"].is_string())
        throw ConfigInvalid("potential.variant: expected a string");
      c.potential.variant = variant_from_name(pot["variant"].get<std::string>());
    }
    c.potential.a = get_number(pot, "potential", "a", c.potential.a);
    c.potential.m = get_number(pot, "potential", "m", c.potential.m);
    c.potential.cap = get_number(pot, "potential", "cap", c.potential.cap);
  }
  c.beta = get_number(doc, "config", "beta", c.beta);
  if (doc.contains("k_list")) {
    if (!doc["k_list"].is_array())
      throw ConfigInvalid("k_list: expected an array of integers");
    c.k_list.clear();
    for (const auto& v : doc["k_list"]) {
      if (!v.is_number_integer())
        throw ConfigInvalid("k_list: expected an array of integers");
      c.k_list.push_back(v.get<int>());
    }
  }
  c.r_samples =
      static_cast<int>(get_number(doc, "config", "r_samples", c.r_samples));
  c.rel_tol = get_number(doc, "config", "rel_tol", c.rel_tol);
  c.budget = static_cast<std::uint64_t>(
      get_number(doc, "config", "budget", static_cast<double>(c.budget)));
  if (doc.contains("basis")) {
    const json& b = doc["basis"];
    if (!b.is_object()) throw ConfigInvalid("basis: expected an object");
    reject_unknown(b, "basis", {"n_radial", "angular_orders", "support"});
    c.basis.n_radial =
        static_cast<int>(get_number(b, "basis", "n_radial", c.basis.n_radial));
    if (b.contains("angular_orders")) {
      if (!b["angular_orders"].is_array())
        throw ConfigInvalid("basis.angular_orders: expected an array");
      c.basis.angular_orders.clear();
      for (const auto& v : b["angular_orders"]) {
        if (!v.is_number_integer())
          throw ConfigInvalid("basis.angular_orders: expected integers");
        c.basis.angular_orders.push_back(v.get<int>());
      }
    }
    c.basis.support = get_number(b, "basis", "support", c.basis.support);
  }
  if (doc.contains("corrector")) {
    if (!doc["corrector"].is_boolean())
      throw ConfigInvalid("corrector: expected a boolean");
    c.corrector = doc["corrector"].get<bool>();
  }
  if (doc.contains("cache_dir")) {
    if (!doc["cache_dir"].is_string())
      throw ConfigInvalid("cache_dir: expected a string");
    c.cache_dir = doc["cache_dir"].get<std::string>();
  }
  if (doc.contains("out_dir")) {
    if (!doc["out_dir"].is_string())
      throw ConfigInvalid("out_dir: expected a string");
    c.out_dir = doc["out_dir"].get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer())
      throw ConfigInvalid("seed: expected an integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  validate(c);
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigInvalid("config: cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string potential_variant_name(PotentialVariant variant) {
  switch (variant) {
    case PotentialVariant::ShiftedPower: return "shifted";
    case PotentialVariant::SoftPower: return "soft";
    case PotentialVariant::CappedPower: return "capped";
  }
  return "?";
}

std::string canonical_config(const RunConfig& c) {
  std::ostringstream out;
  out.setf(std::ios::scientific);
  out.precision(17);
  out << "p=" << c.p << ";variant=" << potential_variant_name(c.potential.variant)
      << ";a=" << c.potential.a << ";m=" << c.potential.m
      << ";cap=" << c.potential.cap << ";beta=" << c.beta << ";k_list=";
  for (std::size_t i = 0; i < c.k_list.size(); ++i)
    out << (i ? "," : "") << c.k_list[i];
  out << ";r_samples=" << c.r_samples << ";rel_tol=" << c.rel_tol
      << ";budget=" << c.budget << ";n_radial=" << c.basis.n_radial
      << ";angular=";
  for (std::size_t i = 0; i < c.basis.angular_orders.size(); ++i)
    out << (i ? "," : "") << c.basis.angular_orders[i];
  out << ";support=" << c.basis.support
      << ";corrector=" << (c.corrector ? 1 : 0) << ";seed=" << c.seed;
  return out.str();
}

std::string config_hash(const RunConfig& c) {
  // FNV-1a, 64 bit.
  const std::string s = canonical_config(c);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

} // namespace spmb
