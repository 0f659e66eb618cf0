#include "config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace s2gsl {

Ablation parse_ablation(const std::string& s) {
  if (s == "full") return Ablation::full;
  if (s == "no_sesg") return Ablation::no_sesg;
  if (s == "no_sylg") return Ablation::no_sylg;
  if (s == "no_fusion") return Ablation::no_fusion;
  throw ValidationError("unknown ablation '" + s + "'");
}

const char* ablation_name(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::no_sesg: return "no_sesg";
    case Ablation::no_sylg: return "no_sylg";
    case Ablation::no_fusion: return "no_fusion";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t to_count(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ValidationError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(std::stoull(v));
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || !std::isfinite(x))
    throw ValidationError("config key '" + key + "' expects a number, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("config key '" + key + "' expects true/false, got '" + v + "'");
}

std::string fmt_real(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

void Config::set(const std::string& key, const std::string& v) {
  using Setter = std::function<void(Config&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"d", [](Config& c, const std::string& v) { c.dim = to_count("d", v); }},
      {"l", [](Config& c, const std::string& v) { c.layers = to_count("l", v); }},
      {"gcn_layers", [](Config& c, const std::string& v) { c.gcn_layers = to_count("gcn_layers", v); }},
      {"sylg_heads", [](Config& c, const std::string& v) { c.sylg_heads = to_count("sylg_heads", v); }},
      {"relation_dim", [](Config& c, const std::string& v) { c.relation_dim = to_count("relation_dim", v); }},
      {"fusion_heads", [](Config& c, const std::string& v) { c.fusion_heads = to_count("fusion_heads", v); }},
      {"ffn_hidden", [](Config& c, const std::string& v) { c.ffn_hidden = to_count("ffn_hidden", v); }},
      {"max_len", [](Config& c, const std::string& v) { c.max_len = to_count("max_len", v); }},
      {"encoder_mixing", [](Config& c, const std::string& v) { c.encoder_mixing = to_bool("encoder_mixing", v); }},
      {"aspect_marker", [](Config& c, const std::string& v) { c.aspect_marker = to_bool("aspect_marker", v); }},
      {"fusion_mode", [](Config& c, const std::string& v) { c.fusion_mode = parse_fusion_mode(v); }},
      {"ablation", [](Config& c, const std::string& v) { c.ablation = parse_ablation(v); }},
      {"mtt_variant",
       [](Config& c, const std::string& v) {
         if (v == "row_replace") c.mtt_variant = MttVariant::row_replace;
         else if (v == "literal") c.mtt_variant = MttVariant::literal;
         else throw ValidationError("unknown mtt_variant '" + v + "'");
       }},
      {"supervise_presoftmax",
       [](Config& c, const std::string& v) { c.supervise_presoftmax = to_bool("supervise_presoftmax", v); }},
      {"logit_masking", [](Config& c, const std::string& v) { c.logit_masking = to_bool("logit_masking", v); }},
      {"adjacency",
       [](Config& c, const std::string& v) {
         if (v == "per_layer") c.adjacency = AdjacencyMode::per_layer;
         else if (v == "head_mean") c.adjacency = AdjacencyMode::head_mean;
         else throw ValidationError("unknown adjacency mode '" + v + "'");
       }},
      {"pool",
       [](Config& c, const std::string& v) {
         if (v == "mean") c.pool = PoolMode::mean;
         else if (v == "cls-first-row") c.pool = PoolMode::first_row;
         else throw ValidationError("unknown pool mode '" + v + "'");
       }},
      {"activation",
       [](Config& c, const std::string& v) {
         if (v == "relu") c.activation = Activation::relu;
         else if (v == "identity") c.activation = Activation::identity;
         else throw ValidationError("unknown activation '" + v + "'");
       }},
      {"lambda1", [](Config& c, const std::string& v) { c.lambda1 = to_real("lambda1", v); }},
      {"lambda2", [](Config& c, const std::string& v) { c.lambda2 = to_real("lambda2", v); }},
      {"learning_rate", [](Config& c, const std::string& v) { c.learning_rate = to_real("learning_rate", v); }},
      {"weight_decay", [](Config& c, const std::string& v) { c.weight_decay = to_real("weight_decay", v); }},
      {"batch_size", [](Config& c, const std::string& v) { c.batch_size = to_count("batch_size", v); }},
      {"epochs", [](Config& c, const std::string& v) { c.epochs = to_count("epochs", v); }},
      {"seed", [](Config& c, const std::string& v) { c.seed = to_count("seed", v); }},
      {"train_data", [](Config& c, const std::string& v) { c.train_data = v; }},
      {"dev_data", [](Config& c, const std::string& v) { c.dev_data = v; }},
      {"eval_data", [](Config& c, const std::string& v) { c.eval_data = v; }},
      {"synthetic_seed", [](Config& c, const std::string& v) { c.synthetic_seed = to_count("synthetic_seed", v); }},
      {"synthetic_train", [](Config& c, const std::string& v) { c.synthetic_train = to_count("synthetic_train", v); }},
      {"synthetic_dev", [](Config& c, const std::string& v) { c.synthetic_dev = to_count("synthetic_dev", v); }},
      {"synthetic_eval", [](Config& c, const std::string& v) { c.synthetic_eval = to_count("synthetic_eval", v); }},
      {"synthetic_min_clauses",
       [](Config& c, const std::string& v) { c.synthetic_min_clauses = to_count("synthetic_min_clauses", v); }},
      {"synthetic_max_clauses",
       [](Config& c, const std::string& v) { c.synthetic_max_clauses = to_count("synthetic_max_clauses", v); }},
      {"ablate_seeds", [](Config& c, const std::string& v) { c.ablate_seeds = to_count("ablate_seeds", v); }},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw ValidationError("unknown config key '" + key + "'");
  it->second(*this, v);
}

void Config::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ValidationError("invalid config: " + msg);
  };
  require(dim > 0 && dim % 2 == 0, "d must be even and positive");
  require(layers >= 1, "l must be >= 1");
  require(gcn_layers >= 1, "gcn_layers must be >= 1");
  require(sylg_heads >= 1, "sylg_heads must be >= 1");
  require(relation_dim >= 1, "relation_dim must be >= 1");
  require(fusion_heads >= 1 && dim % fusion_heads == 0, "fusion_heads must divide d");
  require(max_len >= 1, "max_len must be >= 1");
  require(lambda1 >= 0 && lambda2 >= 0, "lambda1 and lambda2 must be >= 0");
  require(learning_rate > 0, "learning_rate must be positive");
  require(weight_decay >= 0, "weight_decay must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(synthetic_min_clauses >= 1 && synthetic_min_clauses <= synthetic_max_clauses && synthetic_max_clauses <= 3,
          "synthetic clause range must satisfy 1 <= min <= max <= 3");
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::to_string() const {
  auto b = [](bool x) { return x ? "true" : "false"; };
  std::ostringstream os;
  os << "d = " << dim << '\n'
     << "l = " << layers << '\n'
     << "gcn_layers = " << gcn_layers << '\n'
     << "sylg_heads = " << sylg_heads << '\n'
     << "relation_dim = " << relation_dim << '\n'
     << "fusion_heads = " << fusion_heads << '\n'
     << "ffn_hidden = " << ffn_hidden << '\n'
     << "max_len = " << max_len << '\n'
     << "encoder_mixing = " << b(encoder_mixing) << '\n'
     << "aspect_marker = " << b(aspect_marker) << '\n'
     << "fusion_mode = " << fusion_mode_name(fusion_mode) << '\n'
     << "ablation = " << ablation_name(ablation) << '\n'
     << "mtt_variant = " << (mtt_variant == MttVariant::row_replace ? "row_replace" : "literal") << '\n'
     << "supervise_presoftmax = " << b(supervise_presoftmax) << '\n'
     << "logit_masking = " << b(logit_masking) << '\n'
     << "adjacency = " << (adjacency == AdjacencyMode::per_layer ? "per_layer" : "head_mean") << '\n'
     << "pool = " << (pool == PoolMode::mean ? "mean" : "cls-first-row") << '\n'
     << "activation = " << (activation == Activation::relu ? "relu" : "identity") << '\n'
     << "lambda1 = " << fmt_real(lambda1) << '\n'
     << "lambda2 = " << fmt_real(lambda2) << '\n'
     << "learning_rate = " << fmt_real(learning_rate) << '\n'
     << "weight_decay = " << fmt_real(weight_decay) << '\n'
     << "batch_size = " << batch_size << '\n'
     << "epochs = " << epochs << '\n'
     << "seed = " << seed << '\n'
     << "train_data = " << train_data << '\n'
     << "dev_data = " << dev_data << '\n'
     << "eval_data = " << eval_data << '\n'
     << "synthetic_seed = " << synthetic_seed << '\n'
     << "synthetic_train = " << synthetic_train << '\n'
     << "synthetic_dev = " << synthetic_dev << '\n'
     << "synthetic_eval = " << synthetic_eval << '\n'
     << "synthetic_min_clauses = " << synthetic_min_clauses << '\n'
     << "synthetic_max_clauses = " << synthetic_max_clauses << '\n'
     << "ablate_seeds = " << ablate_seeds << '\n';
  return os.str();
}

EncoderConfig Config::encoder() const { return {dim, max_len, encoder_mixing, aspect_marker}; }

SesgConfig Config::sesg() const {
  SesgConfig c;
  c.dim = dim;
  c.heads = layers;
  c.gcn_layers = gcn_layers;
  c.adjacency = adjacency;
  c.logit_masking = logit_masking;
  c.supervise_presoftmax = supervise_presoftmax;
  c.activation = activation;
  return c;
}

SylgConfig Config::sylg() const {
  SylgConfig c;
  c.dim = dim;
  c.heads = sylg_heads;
  c.relation_dim = relation_dim;
  c.gcn_layers = gcn_layers;
  c.variant = mtt_variant;
  c.activation = activation;
  return c;
}

FusionConfig Config::fusion() const {
  FusionConfig c;
  c.dim = dim;
  c.heads = fusion_heads;
  c.ffn_hidden = effective_ffn_hidden();
  c.pool = pool;
  return c;
}

}  // namespace s2gsl
