#include "certmesh/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace certmesh {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  double out = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return out;
}

std::uint64_t parse_u64(const std::string& v) {
  if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative value");
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("not an unsigned integer");
  }
  return out;
}

std::vector<std::uint32_t> parse_ttl_list(const std::string& v) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("empty ttl entry");
    std::uint64_t ttl = parse_u64(item);
    if (ttl < 1 || ttl > 64) throw std::invalid_argument("ttl out of range [1,64]");
    out.push_back(static_cast<std::uint32_t>(ttl));
  }
  if (out.empty()) throw std::invalid_argument("empty ttl schedule");
  return out;
}

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void apply_config_value(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "nodes") {
    cfg.nodes = parse_u64(value);
    check(cfg.nodes >= 2, "nodes must be >= 2");
  } else if (key == "area_x") {
    cfg.area_x = parse_double(value);
    check(cfg.area_x > 0, "area_x must be positive");
  } else if (key == "area_y") {
    cfg.area_y = parse_double(value);
    check(cfg.area_y > 0, "area_y must be positive");
  } else if (key == "duration") {
    cfg.duration = parse_double(value);
    check(cfg.duration > 0, "duration must be positive");
  } else if (key == "vmax") {
    cfg.vmax = parse_double(value);
    check(cfg.vmax > 0, "vmax must be positive");
  } else if (key == "pause") {
    cfg.pause = parse_double(value);
    check(cfg.pause >= 0, "pause must be >= 0");
  } else if (key == "sessions") {
    cfg.sessions = parse_u64(value);
  } else if (key == "attacker_fraction") {
    cfg.attacker_fraction = parse_double(value);
    check(cfg.attacker_fraction >= 0 && cfg.attacker_fraction <= 1,
          "attacker_fraction must be in [0,1]");
  } else if (key == "attacker_mode") {
    if (value == "isolated") {
      cfg.attacker_mode = AttackerMode::isolated;
    } else if (value == "colluding") {
      cfg.attacker_mode = AttackerMode::colluding;
    } else {
      throw std::invalid_argument("attacker_mode must be isolated or colluding");
    }
  } else if (key == "attacker_drops") {
    if (value == "true" || value == "1") {
      cfg.attacker_drops = true;
    } else if (value == "false" || value == "0") {
      cfg.attacker_drops = false;
    } else {
      throw std::invalid_argument("attacker_drops must be true or false");
    }
  } else if (key == "known_certs") {
    cfg.known_certs = parse_u64(value);
  } else if (key == "mpktv") {
    cfg.mpktv = parse_double(value);
    check(cfg.mpktv >= 0 && cfg.mpktv <= 1, "mpktv must be in [0,1]");
  } else if (key == "ttl_schedule") {
    cfg.ttl_schedule = parse_ttl_list(value);
  } else if (key == "radio_range") {
    cfg.radio_range = parse_double(value);
    check(cfg.radio_range > 0, "radio_range must be positive");
  } else if (key == "hop_delay") {
    cfg.hop_delay = parse_double(value);
    check(cfg.hop_delay > 0, "hop_delay must be positive");
  } else if (key == "k_paths") {
    cfg.k_paths = parse_u64(value);
    check(cfg.k_paths >= 1, "k_paths must be >= 1");
  } else if (key == "cert_lifetime") {
    cfg.cert_lifetime = parse_double(value);
    check(cfg.cert_lifetime > 0, "cert_lifetime must be positive");
  } else if (key == "refresh_period") {
    cfg.refresh_period = parse_double(value);
  } else if (key == "seed") {
    cfg.seed = parse_u64(value);
  } else if (key == "replications") {
    cfg.replications = parse_u64(value);
    check(cfg.replications >= 1, "replications must be >= 1");
  } else {
    throw std::invalid_argument("unknown key '" + key + "'");
  }
}

ScenarioConfig parse_config_text(const std::string& text, const std::string& source_name) {
  ScenarioConfig cfg;
  std::stringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source_name, line_no, "expected key=value, got '" + trim(raw) + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source_name, line_no, "empty key");
    if (value.empty()) throw ConfigError(source_name, line_no, "empty value for '" + key + "'");
    try {
      apply_config_value(cfg, key, value);
    } catch (const std::exception& e) {
      throw ConfigError(source_name, line_no, e.what());
    }
  }
  try {
    validate(cfg);
  } catch (const std::exception& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace certmesh
