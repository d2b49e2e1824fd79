#include "tailgen/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "tailgen/errors.hpp"

namespace tailgen {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& value, int lo, int hi) {
  try {
    std::size_t used = 0;
    long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    if (v < lo || v > hi) {
      throw ValidationError(key + " must be in [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "], got " + value);
    }
    return static_cast<int>(v);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError("bad integer for " + key + ": '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("bad unsigned integer for " + key + ": '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    if (!std::isfinite(v)) throw std::invalid_argument("nonfinite");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("bad number for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ValidationError("bad flag for " + key + ": '" + value + "' (use on/off)");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_backend_slot(std::string_view slot) {
  for (auto s : kBackendSlots) {
    if (s == slot) return true;
  }
  return false;
}

}  // namespace

std::string_view backend_impl_name(BackendImpl impl) {
  return impl == BackendImpl::Mock ? "mock" : "http";
}

BackendImpl backend_impl_from_name(std::string_view name) {
  if (name == "mock") return BackendImpl::Mock;
  if (name == "http") return BackendImpl::Http;
  throw ValidationError("unknown backend implementation: " + std::string(name) +
                        " (use mock or http)");
}

PipelineConfig::PipelineConfig() {
  for (auto slot : kBackendSlots) backends[std::string(slot)] = BackendImpl::Mock;
}

BackendImpl PipelineConfig::backend_for(std::string_view slot) const {
  auto it = backends.find(std::string(slot));
  if (it == backends.end()) {
    throw ValidationError("unknown backend slot: " + std::string(slot));
  }
  return it->second;
}

void PipelineConfig::validate() const {
  if (per_class_cap < 1) throw ValidationError("per_class_cap must be >= 1");
  if (score_threshold < 0.0 || score_threshold > 1.0) {
    throw ValidationError("score_threshold must be in [0, 1]");
  }
  if (max_cycles < 1) throw ValidationError("max_cycles must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(mix_alpha > 0.0)) throw ValidationError("mix_alpha must be > 0");
  if (num_mix_samples < 0) throw ValidationError("num_mix_samples must be >= 0");
  if (resolution < 4) throw ValidationError("resolution must be >= 4");
  if (worker_width < 1 || worker_width > 256) {
    throw ValidationError("worker_width must be in [1, 256]");
  }
  if (original_source != "procedural" && original_source != "files") {
    throw ValidationError("original_source must be procedural or files");
  }
  if (image_limit.capacity < 1 || text_limit.capacity < 1) {
    throw ValidationError("rate limit capacities must be >= 1");
  }
  if (image_limit.window.count() <= 0 || text_limit.window.count() <= 0) {
    throw ValidationError("rate limit windows must be positive");
  }
  if (retry.max_retries < 0 || retry.max_retries > 16) {
    throw ValidationError("retry.max_retries must be in [0, 16]");
  }
  mock.validate();
}

void apply_profile(PipelineConfig& config, const std::string& name) {
  if (name == "imagenet_lt") {
    config.per_class_cap = 300;
    config.score_threshold = 0.8;
  } else if (name == "places_lt") {
    config.per_class_cap = 800;
    config.score_threshold = 0.8;
  } else if (name == "inaturalist") {
    config.per_class_cap = 100;
    config.score_threshold = 0.6;
  } else {
    throw ValidationError("unknown profile: " + name +
                          " (use imagenet_lt, places_lt, or inaturalist)");
  }
  config.profile = name;
}

void set_option(PipelineConfig& c, const std::string& key, const std::string& value) {
  if (key == "profile") {
    apply_profile(c, value);
  } else if (key == "per_class_cap") {
    c.per_class_cap = parse_int(key, value, 1, 1'000'000);
  } else if (key == "score_threshold") {
    c.score_threshold = parse_double(key, value);
  } else if (key == "max_cycles") {
    c.max_cycles = parse_int(key, value, 1, 100);
  } else if (key == "batch_size") {
    c.batch_size = parse_int(key, value, 1, 10'000);
  } else if (key == "mix_alpha") {
    c.mix_alpha = parse_double(key, value);
  } else if (key == "num_mix_samples") {
    c.num_mix_samples = parse_int(key, value, 0, 100'000'000);
  } else if (key == "resolution") {
    c.resolution = parse_int(key, value, 1, 65'536);
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else if (key == "worker_width") {
    c.worker_width = parse_int(key, value, 1, 256);
  } else if (key == "cache") {
    c.cache_enabled = parse_bool(key, value);
  } else if (key == "cache_dir") {
    c.cache_dir = value;
  } else if (key == "clock") {
    if (value == "simulated") {
      c.simulated_clock = true;
    } else if (value == "system") {
      c.simulated_clock = false;
    } else {
      throw ValidationError("clock must be simulated or system");
    }
  } else if (key == "original_source") {
    c.original_source = value;
  } else if (key == "rate_limit.image.capacity") {
    c.image_limit.capacity = parse_int(key, value, 1, 1'000'000);
  } else if (key == "rate_limit.image.window_s") {
    c.image_limit.window = std::chrono::seconds(parse_int(key, value, 1, 86'400));
  } else if (key == "rate_limit.text.capacity") {
    c.text_limit.capacity = parse_int(key, value, 1, 1'000'000);
  } else if (key == "rate_limit.text.window_s") {
    c.text_limit.window = std::chrono::seconds(parse_int(key, value, 1, 86'400));
  } else if (key == "retry.max_retries") {
    c.retry.max_retries = parse_int(key, value, 0, 16);
  } else if (key == "retry.base_delay_ms") {
    c.retry.base_delay = std::chrono::milliseconds(parse_int(key, value, 0, 3'600'000));
  } else if (key == "retry.max_delay_ms") {
    c.retry.max_delay = std::chrono::milliseconds(parse_int(key, value, 0, 3'600'000));
  } else if (key.rfind("backend.", 0) == 0) {
    std::string slot = key.substr(8);
    if (!is_backend_slot(slot)) throw ValidationError("unknown config key: " + key);
    c.backends[slot] = backend_impl_from_name(value);
  } else if (key == "mock.duplicate_rate") {
    c.mock.duplicate_rate = parse_double(key, value);
  } else if (key == "mock.embed_base") {
    c.mock.embed_base = parse_double(key, value);
  } else if (key == "mock.embed_gain") {
    c.mock.embed_gain = parse_double(key, value);
  } else if (key == "mock.embed_dim") {
    c.mock.embed_dim = parse_int(key, value, 2, 65'536);
  } else if (key == "mock.image_size") {
    c.mock.image_size = parse_int(key, value, 4, 4'096);
  } else if (key == "http.endpoint") {
    c.http.endpoint = value;
  } else if (key == "http.api_key") {
    c.http.api_key = value;
  } else if (key == "http.timeout_ms") {
    c.http.timeout = std::chrono::milliseconds(parse_int(key, value, 1, 3'600'000));
  } else {
    throw ValidationError("unknown config key: " + key);
  }
}

PipelineConfig parse_config_text(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value",
                       body, line_no);
    }
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw ParseError("config line " + std::to_string(line_no) + ": empty key", body, line_no);
    }
    pairs.emplace_back(std::move(key), std::move(value));
  }

  PipelineConfig config;
  // The profile preset applies first so explicit keys override it
  // independent of their position in the file.
  for (const auto& [k, v] : pairs) {
    if (k == "profile") apply_profile(config, v);
  }
  for (const auto& [k, v] : pairs) {
    if (k != "profile") set_option(config, k, v);
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path);
  return parse_config_text(in);
}

std::string serialize_config(const PipelineConfig& c) {
  std::ostringstream os;
  os << "profile = " << c.profile << '\n';
  os << "per_class_cap = " << c.per_class_cap << '\n';
  os << "score_threshold = " << fmt_double(c.score_threshold) << '\n';
  os << "max_cycles = " << c.max_cycles << '\n';
  os << "batch_size = " << c.batch_size << '\n';
  os << "mix_alpha = " << fmt_double(c.mix_alpha) << '\n';
  os << "num_mix_samples = " << c.num_mix_samples << '\n';
  os << "resolution = " << c.resolution << '\n';
  os << "seed = " << c.seed << '\n';
  os << "worker_width = " << c.worker_width << '\n';
  os << "cache = " << (c.cache_enabled ? "on" : "off") << '\n';
  if (!c.cache_dir.empty()) os << "cache_dir = " << c.cache_dir << '\n';
  os << "clock = " << (c.simulated_clock ? "simulated" : "system") << '\n';
  os << "original_source = " << c.original_source << '\n';
  os << "rate_limit.image.capacity = " << c.image_limit.capacity << '\n';
  os << "rate_limit.image.window_s = "
     << std::chrono::duration_cast<std::chrono::seconds>(c.image_limit.window).count() << '\n';
  os << "rate_limit.text.capacity = " << c.text_limit.capacity << '\n';
  os << "rate_limit.text.window_s = "
     << std::chrono::duration_cast<std::chrono::seconds>(c.text_limit.window).count() << '\n';
  os << "retry.max_retries = " << c.retry.max_retries << '\n';
  os << "retry.base_delay_ms = "
     << std::chrono::duration_cast<std::chrono::milliseconds>(c.retry.base_delay).count()
     << '\n';
  os << "retry.max_delay_ms = "
     << std::chrono::duration_cast<std::chrono::milliseconds>(c.retry.max_delay).count()
     << '\n';
  for (auto slot : kBackendSlots) {
    os << "backend." << slot << " = " << backend_impl_name(c.backend_for(slot)) << '\n';
  }
  os << "mock.duplicate_rate = " << fmt_double(c.mock.duplicate_rate) << '\n';
  os << "mock.embed_base = " << fmt_double(c.mock.embed_base) << '\n';
  os << "mock.embed_gain = " << fmt_double(c.mock.embed_gain) << '\n';
  os << "mock.embed_dim = " << c.mock.embed_dim << '\n';
  os << "mock.image_size = " << c.mock.image_size << '\n';
  if (!c.http.endpoint.empty()) os << "http.endpoint = " << c.http.endpoint << '\n';
  if (!c.http.api_key.empty()) os << "http.api_key = " << c.http.api_key << '\n';
  os << "http.timeout_ms = "
     << std::chrono::duration_cast<std::chrono::milliseconds>(c.http.timeout).count() << '\n';
  return os.str();
}

void save_config(const PipelineConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open for write: " + path);
  out << serialize_config(config);
}

}  // namespace tailgen
