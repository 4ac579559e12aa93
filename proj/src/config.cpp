#include "motocal/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace motocal {

namespace {

double parse_double(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': not a number: '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': not an integer: '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': not an unsigned integer: '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InputError("config key '" + key + "': expected true/false: '" + value + "'");
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream oss;
  oss.precision(17);
  oss << v;
  return oss.str();
}

}  // namespace

std::string to_string(CalibMode mode) {
  return mode == CalibMode::kLimo ? "limo" : "vanilla";
}

CalibMode mode_from_string(const std::string& s) {
  if (s == "limo") return CalibMode::kLimo;
  if (s == "vanilla") return CalibMode::kVanilla;
  throw InputError("unknown mode '" + s + "' (want limo or vanilla)");
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "mode") c.mode = mode_from_string(value);
  else if (key == "voxel_size") c.voxel_size = parse_double(key, value);
  else if (key == "planarity_min") c.planarity_min = parse_double(key, value);
  else if (key == "cond_max") c.cond_max = parse_double(key, value);
  else if (key == "gamma") c.gamma = parse_double(key, value);
  else if (key == "k_max") c.k_max = parse_int(key, value);
  else if (key == "min_voxel_support") c.min_voxel_support = parse_int(key, value);
  else if (key == "bin_width_deg") c.bin_width_deg = parse_double(key, value);
  else if (key == "delta_theta_min_deg") c.delta_theta_min_deg = parse_double(key, value);
  else if (key == "r_corr") c.r_corr = parse_double(key, value);
  else if (key == "pairs_per_primitive") c.pairs_per_primitive = parse_int(key, value);
  else if (key == "huber_delta") c.huber_delta = parse_double(key, value);
  else if (key == "relative_cost_tolerance") c.relative_cost_tolerance = parse_double(key, value);
  else if (key == "max_inner_iterations") c.max_inner_iterations = parse_int(key, value);
  else if (key == "max_outer_iterations") c.max_outer_iterations = parse_int(key, value);
  else if (key == "outer_tol_rotation") c.outer_tol_rotation = parse_double(key, value);
  else if (key == "outer_tol_translation") c.outer_tol_translation = parse_double(key, value);
  else if (key == "lm_lambda_init") c.lm_lambda_init = parse_double(key, value);
  else if (key == "lm_lambda_up") c.lm_lambda_up = parse_double(key, value);
  else if (key == "lm_lambda_down") c.lm_lambda_down = parse_double(key, value);
  else if (key == "rotation_jacobian_form") {
    if (value != "exact" && value != "near_identity") {
      throw InputError("config key 'rotation_jacobian_form': want exact or near_identity");
    }
    c.rotation_jacobian_form = value;
  }
  else if (key == "optimize_time_offset") c.optimize_time_offset = parse_bool(key, value);
  else if (key == "time_offset") c.time_offset = parse_double(key, value);
  else if (key == "yaw_fixed") c.yaw_fixed = parse_double(key, value);
  else if (key == "tz_fixed") c.tz_fixed = parse_double(key, value);
  else if (key == "range_validation") c.range_validation = parse_bool(key, value);
  else if (key == "range_min") c.range_min = parse_double(key, value);
  else if (key == "range_max") c.range_max = parse_double(key, value);
  else if (key == "seed") c.seed = parse_u64(key, value);
  else if (key == "workers") c.workers = parse_int(key, value);
  else throw InputError("unknown config key: '" + key + "'");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream iss(line);
    std::string key, value, extra;
    if (!(iss >> key) || key[0] == '#') continue;
    if (!(iss >> value)) throw ParseError(path, line_no, "missing value for key '" + key + "'");
    if (value == "=") {
      if (!(iss >> value)) throw ParseError(path, line_no, "missing value for key '" + key + "'");
    }
    if (iss >> extra) throw ParseError(path, line_no, "trailing tokens after value");
    try {
      set_config_value(config, key, value);
    } catch (const InputError& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  config.validate();
  return config;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  return {
      {"mode", to_string(c.mode)},
      {"voxel_size", format_double(c.voxel_size)},
      {"planarity_min", format_double(c.planarity_min)},
      {"cond_max", format_double(c.cond_max)},
      {"gamma", format_double(c.gamma)},
      {"k_max", std::to_string(c.k_max)},
      {"min_voxel_support", std::to_string(c.min_voxel_support)},
      {"bin_width_deg", format_double(c.bin_width_deg)},
      {"delta_theta_min_deg", format_double(c.delta_theta_min_deg)},
      {"r_corr", format_double(c.r_corr)},
      {"pairs_per_primitive", std::to_string(c.pairs_per_primitive)},
      {"huber_delta", format_double(c.huber_delta)},
      {"relative_cost_tolerance", format_double(c.relative_cost_tolerance)},
      {"max_inner_iterations", std::to_string(c.max_inner_iterations)},
      {"max_outer_iterations", std::to_string(c.max_outer_iterations)},
      {"outer_tol_rotation", format_double(c.outer_tol_rotation)},
      {"outer_tol_translation", format_double(c.outer_tol_translation)},
      {"lm_lambda_init", format_double(c.lm_lambda_init)},
      {"lm_lambda_up", format_double(c.lm_lambda_up)},
      {"lm_lambda_down", format_double(c.lm_lambda_down)},
      {"rotation_jacobian_form", c.rotation_jacobian_form},
      {"optimize_time_offset", c.optimize_time_offset ? "true" : "false"},
      {"time_offset", format_double(c.time_offset)},
      {"yaw_fixed", format_double(c.yaw_fixed)},
      {"tz_fixed", format_double(c.tz_fixed)},
      {"range_validation", c.range_validation ? "true" : "false"},
      {"range_min", format_double(c.range_min)},
      {"range_max", format_double(c.range_max)},
      {"seed", std::to_string(c.seed)},
      {"workers", std::to_string(c.workers)},
  };
}

void RunConfig::validate() const {
  if (voxel_size <= 0.0) throw InputError("voxel_size must be positive");
  if (planarity_min < 0.0 || planarity_min > 1.0) {
    throw InputError("planarity_min must lie in [0, 1]");
  }
  if (cond_max <= 1.0) throw InputError("cond_max must exceed 1");
  if (gamma <= 0.0 || gamma > 1.0) throw InputError("gamma must lie in (0, 1]");
  if (k_max < 3) throw InputError("k_max must be >= 3");
  if (min_voxel_support < 1) throw InputError("min_voxel_support must be >= 1");
  if (bin_width_deg <= 0.0) throw InputError("bin_width_deg must be positive");
  if (delta_theta_min_deg <= 0.0 || delta_theta_min_deg > 180.0) {
    throw InputError("delta_theta_min_deg must lie in (0, 180]");
  }
  if (r_corr <= 0.0) throw InputError("r_corr must be positive");
  if (pairs_per_primitive < 1) throw InputError("pairs_per_primitive must be >= 1");
  if (range_min <= 0.0 || range_max <= range_min) {
    throw InputError("range limits must satisfy 0 < min < max");
  }
  if (workers < 0) throw InputError("workers must be >= 0");
  solver_config();  // validates the solver block
}

SolverConfig RunConfig::solver_config() const {
  SolverConfig sc;
  sc.huber_delta = huber_delta;
  sc.max_inner_iterations = max_inner_iterations;
  sc.max_outer_iterations = max_outer_iterations;
  sc.relative_cost_tolerance = relative_cost_tolerance;
  sc.outer_tol_rotation = outer_tol_rotation;
  sc.outer_tol_translation = outer_tol_translation;
  sc.lm_initial_lambda = lm_lambda_init;
  sc.lm_lambda_up = lm_lambda_up;
  sc.lm_lambda_down = lm_lambda_down;
  sc.workers = workers;
  sc.rotation_jacobian_form = rotation_jacobian_form == "exact"
                                  ? RotationJacobianForm::kExact
                                  : RotationJacobianForm::kNearIdentity;
  sc.optimize_time_offset = optimize_time_offset;
  sc.time_offset = time_offset;
  if (sc.huber_delta <= 0.0) throw InputError("huber_delta must be positive");
  if (sc.max_inner_iterations < 1 || sc.max_outer_iterations < 1) {
    throw InputError("iteration caps must be >= 1");
  }
  if (sc.relative_cost_tolerance <= 0.0 || sc.outer_tol_rotation <= 0.0 ||
      sc.outer_tol_translation <= 0.0) {
    throw InputError("solver tolerances must be positive");
  }
  if (sc.lm_initial_lambda <= 0.0 || sc.lm_lambda_up <= 1.0 ||
      sc.lm_lambda_down <= 0.0 || sc.lm_lambda_down >= 1.0) {
    throw InputError("LM lambda schedule must satisfy up > 1, 0 < down < 1");
  }
  return sc;
}

ExtractionConfig RunConfig::extraction_config() const {
  ExtractionConfig ec;
  ec.voxel_size = voxel_size;
  ec.min_voxel_support = min_voxel_support;
  ec.gamma = gamma;
  ec.k_max = k_max;
  ec.planarity_min = planarity_min;
  ec.cond_max = cond_max;
  ec.distance_weighting = mode == CalibMode::kLimo;
  ec.unit_weights = mode == CalibMode::kVanilla;
  ec.workers = workers;
  return ec;
}

AssociationConfig RunConfig::association_config() const {
  AssociationConfig ac;
  ac.delta_theta_min = delta_theta_min_deg * M_PI / 180.0;
  ac.r_corr = r_corr;
  ac.pairs_per_primitive = pairs_per_primitive;
  ac.workers = workers;
  return ac;
}

RangeValidation RunConfig::range_validation_config() const {
  return {range_validation, range_min, range_max};
}

}  // namespace motocal
