#include "copulacd/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <sstream>

#include "copulacd/error.hpp"

namespace copulacd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw UsageError("config key '" + key + "': cannot parse '" + raw + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw UsageError("config key '" + key + "': expected a boolean, got '" + raw + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  for (const auto& item : split(raw, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& values, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& raw) {
  std::filesystem::path p(trim(raw));
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

std::vector<PixelRect> parse_rects(const std::string& key, const std::string& raw) {
  std::vector<PixelRect> out;
  if (trim(raw).empty()) return out;
  for (const auto& item : split(raw, ',')) {
    std::istringstream in(item);
    PixelRect r;
    if (!(in >> r.x0 >> r.y0 >> r.x1 >> r.y1) || !(in >> std::ws).eof()) {
      throw UsageError("config key '" + key + "': expected 'x0 y0 x1 y1' rectangles, got '" + item + "'");
    }
    out.push_back(r);
  }
  return out;
}

std::string rects_to_text(const std::vector<PixelRect>& rects) {
  std::string out;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    const auto& r = rects[i];
    if (i) out += ", ";
    out += std::to_string(r.x0) + " " + std::to_string(r.y0) + " " + std::to_string(r.x1) + " " +
           std::to_string(r.y1);
  }
  return out;
}

using Setter = std::function<void(const std::string&)>;

}  // namespace

std::string to_string(Backend b) {
  switch (b) {
    case Backend::neural: return "neural";
    case Backend::gaussian: return "gaussian";
    case Backend::student_t: return "student_t";
    case Backend::clayton: return "clayton";
    case Backend::frank: return "frank";
  }
  return "?";
}

Backend parse_backend(const std::string& name) {
  const std::string s = trim(name);
  if (s == "neural") return Backend::neural;
  if (s == "gaussian") return Backend::gaussian;
  if (s == "student_t") return Backend::student_t;
  if (s == "clayton") return Backend::clayton;
  if (s == "frank") return Backend::frank;
  throw UsageError("unknown copula backend '" + name + "'");
}

CopulaFamily parse_copula(const std::string& text) {
  static const std::regex re(R"(^\s*(gaussian|student_t|clayton|frank)\s*\(([^)]*)\)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw UsageError("cannot parse copula '" + text + "'");
  const Family family = parse_family(m[1]);
  const auto args = parse_list<double>("copula", m[2]);
  const std::size_t want = family == Family::student_t ? 2 : 1;
  if (args.size() != want) throw UsageError("copula '" + text + "' has the wrong number of parameters");
  switch (family) {
    case Family::gaussian: return CopulaFamily::gaussian(args[0]);
    case Family::student_t: return CopulaFamily::student_t(args[0], args[1]);
    case Family::clayton: return CopulaFamily::clayton(args[0]);
    case Family::frank: return CopulaFamily::frank(args[0]);
  }
  throw UsageError("cannot parse copula '" + text + "'");
}

std::string copula_to_text(const CopulaFamily& fam) {
  switch (fam.family) {
    case Family::gaussian: return "gaussian(" + fmt(fam.rho) + ")";
    case Family::student_t: return "student_t(" + fmt(fam.rho) + "," + fmt(fam.nu) + ")";
    case Family::clayton: return "clayton(" + fmt(fam.theta) + ")";
    case Family::frank: return "frank(" + fmt(fam.theta) + ")";
  }
  return {};
}

void PipelineConfig::validate() const {
  if (n1 < 2 || n7 < 2) throw UsageError("superpixel counts n1 and n7 must be >= 2");
  if (!(compactness > 0.0)) throw UsageError("compactness must be > 0");
  if (slic.iterations < 1 || slic.min_size_divisor < 1) throw UsageError("invalid SLIC options");
  if (!(output_margin >= 0.0)) throw UsageError("output_margin must be >= 0");
  if (!(kde.bandwidth_scale > 0.0)) throw UsageError("kde bandwidth_scale must be > 0");
  if (layer_sizes.size() < 2 || layer_sizes.front() != 2 || layer_sizes.back() != 1) {
    throw UsageError("layer_sizes must start with 2 and end with 1");
  }
  for (const int s : layer_sizes) {
    if (s < 1) throw UsageError("layer sizes must be positive");
  }
  train.validate();
  fcm.validate();
  synth.validate();
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }

  PipelineConfig c;
  std::optional<std::uint64_t> synth_seed;
  PixelRect region;
  int region_keys = 0;
  std::optional<MarginalSpec> change_marginal;
  LossWeights& w = c.train.loss.weights;
  const auto region_key = [&](int PixelRect::*field, const char* name) -> Setter {
    return [&region, &region_keys, field, name](const std::string& v) {
      region.*field = parse_number<int>(name, v);
      ++region_keys;
    };
  };

  const std::map<std::string, std::map<std::string, Setter>> table{
      {"general", {{"seed", [&](const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); }}}},
      {"paths",
       {{"pre", [&](const std::string& v) { c.paths.pre = resolve(base_dir, v); }},
        {"post", [&](const std::string& v) { c.paths.post = resolve(base_dir, v); }},
        {"truth",
         [&](const std::string& v) {
           if (!trim(v).empty()) c.paths.truth = resolve(base_dir, v);
         }},
        {"output_dir", [&](const std::string& v) { c.paths.output_dir = resolve(base_dir, v); }}}},
      {"segmentation",
       {{"n1", [&](const std::string& v) { c.n1 = parse_number<int>("n1", v); }},
        {"n7", [&](const std::string& v) { c.n7 = parse_number<int>("n7", v); }},
        {"compactness", [&](const std::string& v) { c.compactness = parse_number<double>("compactness", v); }},
        {"iterations", [&](const std::string& v) { c.slic.iterations = parse_number<int>("iterations", v); }},
        {"min_size_divisor",
         [&](const std::string& v) { c.slic.min_size_divisor = parse_number<int>("min_size_divisor", v); }}}},
      {"training_region",
       {{"x0", region_key(&PixelRect::x0, "x0")},
        {"y0", region_key(&PixelRect::y0, "y0")},
        {"x1", region_key(&PixelRect::x1, "x1")},
        {"y1", region_key(&PixelRect::y1, "y1")}}},
      {"train",
       {{"epochs", [&](const std::string& v) { c.train.epochs = parse_number<long>("epochs", v); }},
        {"learning_rate",
         [&](const std::string& v) { c.train.learning_rate = parse_number<double>("learning_rate", v); }},
        {"beta1", [&](const std::string& v) { c.train.beta1 = parse_number<double>("beta1", v); }},
        {"beta2", [&](const std::string& v) { c.train.beta2 = parse_number<double>("beta2", v); }},
        {"epsilon", [&](const std::string& v) { c.train.epsilon = parse_number<double>("epsilon", v); }},
        {"n3", [&](const std::string& v) { c.train.loss.n3 = parse_number<int>("n3", v); }},
        {"n4", [&](const std::string& v) { c.train.loss.n4 = parse_number<int>("n4", v); }},
        {"n5", [&](const std::string& v) { c.train.loss.n5 = parse_number<int>("n5", v); }},
        {"n6", [&](const std::string& v) { c.train.loss.n6 = parse_number<int>("n6", v); }},
        {"eta", [&](const std::string& v) { c.train.loss.eta = parse_number<double>("eta", v); }},
        {"rho", [&](const std::string& v) { c.train.loss.rho = parse_number<double>("rho", v); }},
        {"weights",
         [&](const std::string& v) {
           const auto ws = parse_list<double>("weights", v);
           if (ws.size() != 5) throw UsageError("config key 'weights' needs five values");
           w = LossWeights{ws[0], ws[1], ws[2], ws[3], ws[4]};
         }},
        {"layer_sizes", [&](const std::string& v) { c.layer_sizes = parse_list<int>("layer_sizes", v); }},
        {"hidden_activation", [&](const std::string& v) { c.hidden_activation = parse_activation(trim(v)); }},
        {"output_activation",
         [&](const std::string& v) { c.output_activation = parse_output_activation(trim(v)); }},
        {"output_margin",
         [&](const std::string& v) { c.output_margin = parse_number<double>("output_margin", v); }}}},
      {"kde",
       {{"bandwidth_scale",
         [&](const std::string& v) { c.kde.bandwidth_scale = parse_number<double>("bandwidth_scale", v); }}}},
      {"clustering",
       {{"fuzzifier", [&](const std::string& v) { c.fcm.fuzzifier = parse_number<double>("fuzzifier", v); }},
        {"tolerance", [&](const std::string& v) { c.fcm.tolerance = parse_number<double>("tolerance", v); }},
        {"max_iterations",
         [&](const std::string& v) { c.fcm.max_iterations = parse_number<int>("max_iterations", v); }}}},
      {"inference", {{"backend", [&](const std::string& v) { c.backend = parse_backend(v); }}}},
      {"synth",
       {{"width", [&](const std::string& v) { c.synth.width = parse_number<int>("width", v); }},
        {"height", [&](const std::string& v) { c.synth.height = parse_number<int>("height", v); }},
        {"dependence", [&](const std::string& v) { c.synth.dependence = parse_copula(v); }},
        {"change_regions",
         [&](const std::string& v) { c.synth.change_regions = parse_rects("change_regions", v); }},
        {"noise_sigma",
         [&](const std::string& v) { c.synth.noise_sigma = parse_number<double>("noise_sigma", v); }},
        {"marginal_pre", [&](const std::string& v) { c.synth.marginal_pre = MarginalSpec::parse(v); }},
        {"marginal_post", [&](const std::string& v) { c.synth.marginal_post = MarginalSpec::parse(v); }},
        {"change_marginal_post",
         [&](const std::string& v) {
           if (!trim(v).empty()) change_marginal = MarginalSpec::parse(v);
         }},
        {"blur", [&](const std::string& v) { c.synth.blur = parse_bool("blur", v); }},
        {"seed", [&](const std::string& v) { synth_seed = parse_number<std::uint64_t>("seed", v); }}}},
  };

  for (const auto& [section, keys] : tree) {
    const auto sec = table.find(section);
    if (sec == table.end()) throw UsageError("unknown config section [" + section + "]");
    if (!keys.data().empty()) throw UsageError("config key '" + section + "' must sit inside a section");
    for (const auto& [key, value] : keys) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw UsageError("unknown config key '" + key + "' in [" + section + "]");
      setter->second(value.data());
    }
  }

  if (region_keys == 4) {
    c.training_region = region;
  } else if (region_keys != 0) {
    throw UsageError("[training_region] needs all of x0, y0, x1, y1");
  }
  c.synth.change_marginal_post = change_marginal;
  c.train.seed = c.seed;
  c.fcm.seed = c.seed;
  c.synth.seed = synth_seed.value_or(c.seed);
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string to_config_text(const PipelineConfig& c) {
  const auto& l = c.train.loss;
  const auto& w = l.weights;
  std::ostringstream o;
  o << "[general]\nseed = " << c.seed << "\n\n";
  o << "[paths]\npre = " << c.paths.pre.string() << "\npost = " << c.paths.post.string() << "\n";
  if (c.paths.truth) o << "truth = " << c.paths.truth->string() << "\n";
  o << "output_dir = " << c.paths.output_dir.string() << "\n\n";
  o << "[segmentation]\nn1 = " << c.n1 << "\nn7 = " << c.n7 << "\ncompactness = " << fmt(c.compactness)
    << "\niterations = " << c.slic.iterations << "\nmin_size_divisor = " << c.slic.min_size_divisor << "\n\n";
  if (c.training_region) {
    const auto& r = *c.training_region;
    o << "[training_region]\nx0 = " << r.x0 << "\ny0 = " << r.y0 << "\nx1 = " << r.x1 << "\ny1 = " << r.y1
      << "\n\n";
  }
  o << "[train]\nepochs = " << c.train.epochs << "\nlearning_rate = " << fmt(c.train.learning_rate)
    << "\nbeta1 = " << fmt(c.train.beta1) << "\nbeta2 = " << fmt(c.train.beta2)
    << "\nepsilon = " << fmt(c.train.epsilon) << "\nn3 = " << l.n3 << "\nn4 = " << l.n4 << "\nn5 = " << l.n5
    << "\nn6 = " << l.n6 << "\neta = " << fmt(l.eta) << "\nrho = " << fmt(l.rho) << "\nweights = "
    << join(std::vector<double>{w.boundary, w.integration, w.nonneg, w.ml, w.observation}, ", ")
    << "\nlayer_sizes = " << join(c.layer_sizes, ", ") << "\nhidden_activation = " << to_string(c.hidden_activation)
    << "\noutput_activation = " << to_string(c.output_activation) << "\noutput_margin = " << fmt(c.output_margin)
    << "\n\n";
  o << "[kde]\nbandwidth_scale = " << fmt(c.kde.bandwidth_scale) << "\n\n";
  o << "[clustering]\nfuzzifier = " << fmt(c.fcm.fuzzifier) << "\ntolerance = " << fmt(c.fcm.tolerance)
    << "\nmax_iterations = " << c.fcm.max_iterations << "\n\n";
  o << "[inference]\nbackend = " << to_string(c.backend) << "\n\n";
  const auto& s = c.synth;
  o << "[synth]\nwidth = " << s.width << "\nheight = " << s.height << "\ndependence = " << copula_to_text(s.dependence)
    << "\nchange_regions = " << rects_to_text(s.change_regions) << "\nnoise_sigma = " << fmt(s.noise_sigma)
    << "\nmarginal_pre = " << s.marginal_pre.to_string() << "\nmarginal_post = " << s.marginal_post.to_string()
    << "\n";
  if (s.change_marginal_post) o << "change_marginal_post = " << s.change_marginal_post->to_string() << "\n";
  o << "blur = " << (s.blur ? "true" : "false") << "\nseed = " << s.seed << "\n";
  return o.str();
}

}  // namespace copulacd
