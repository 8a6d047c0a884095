#include "dflsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "config_json.hpp"
#include "dflsim/error.hpp"

namespace dflsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Wraps one JSON object and remembers which keys were consumed, so that
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const json* find(std::string_view key) {
    seen_.emplace(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(std::string_view key) const { return join(path_, key); }

  void read(std::string_view key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
      const auto x = v->get<std::int64_t>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw ConfigError(path(key), "integer out of range");
      }
      out = static_cast<int>(x);
    }
  }

  void read(std::string_view key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (v->is_number_unsigned()) {
        out = v->get<std::uint64_t>();
      } else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
        out = static_cast<std::uint64_t>(v->get<std::int64_t>());
      } else {
        throw ConfigError(path(key), "expected a non-negative integer");
      }
    }
  }

  void read(std::string_view key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(path(key), "expected a number");
      out = v->get<double>();
    }
  }

  void read(std::string_view key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  std::optional<std::string> string(std::string_view key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(path(key), "expected a string");
    return v->get<std::string>();
  }

  template <typename Fn>
  void object(std::string_view key, Fn&& fn) {
    if (const json* v = find(key)) {
      ObjectReader sub(*v, path(key));
      fn(sub);
      sub.finish();
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(path(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

template <typename E, typename Parse>
void read_enum(ObjectReader& r, std::string_view key, E& out, Parse parse) {
  if (auto s = r.string(key)) {
    try {
      out = parse(*s);
    } catch (const InvalidArgument& e) {
      throw ConfigError(r.path(key), e.what());
    }
  }
}

Paradigm paradigm_from_string(std::string_view s) {
  if (s == "cfl") return Paradigm::cfl;
  if (s == "dfl") return Paradigm::dfl;
  throw InvalidArgument("unknown paradigm '" + std::string(s) + "' (expected cfl or dfl)");
}

TopologyKind topology_from_string(std::string_view s) {
  for (auto k : {TopologyKind::fully_connected, TopologyKind::ring, TopologyKind::star, TopologyKind::watts_strogatz}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown topology '" + std::string(s) + "'");
}

DatasetKind dataset_from_string(std::string_view s) {
  for (auto k : {DatasetKind::mnist, DatasetKind::fashion_mnist, DatasetKind::synthetic}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown dataset '" + std::string(s) + "'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace

namespace detail {

ScenarioConfig config_from_json(const json& j, const fs::path& base_dir) {
  ScenarioConfig c;
  ObjectReader r(j, "");
  read_enum(r, "paradigm", c.paradigm, paradigm_from_string);
  r.object("topology", [&](ObjectReader& t) {
    read_enum(t, "name", c.topology.kind, topology_from_string);
    t.read("k", c.topology.k);
    t.read("p", c.topology.p);
    t.read("hub", c.topology.hub);
  });
  r.read("n_clients", c.n_clients);
  r.read("rounds", c.rounds);
  r.read("epochs_per_round", c.epochs_per_round);
  r.object("dataset", [&](ObjectReader& d) {
    read_enum(d, "name", c.dataset.kind, dataset_from_string);
    if (auto dir = d.string("dir")) {
      const fs::path root = resolve(base_dir, *dir);
      c.dataset.train_images = root / "train-images-idx3-ubyte";
      c.dataset.train_labels = root / "train-labels-idx1-ubyte";
      c.dataset.test_images = root / "t10k-images-idx3-ubyte";
      c.dataset.test_labels = root / "t10k-labels-idx1-ubyte";
    }
    for (auto [key, field] : {std::pair{"train_images", &c.dataset.train_images},
                              std::pair{"train_labels", &c.dataset.train_labels},
                              std::pair{"test_images", &c.dataset.test_images},
                              std::pair{"test_labels", &c.dataset.test_labels}}) {
      if (auto p = d.string(key)) *field = resolve(base_dir, *p);
    }
    d.read("subsample", c.dataset.subsample);
    d.object("synthetic", [&](ObjectReader& s) {
      auto& syn = c.dataset.synthetic;
      s.read("classes", syn.classes);
      s.read("per_class", syn.per_class);
      s.read("test_per_class", syn.test_per_class);
      s.read("dim", syn.dim);
      s.read("spread", syn.spread);
      s.read("seed", syn.seed);
      int h = 0, w = 0;
      s.read("image_height", h);
      s.read("image_width", w);
      if (h != 0 || w != 0) syn.image_shape = ImageShape{h, w};
    });
  });
  if (const json* a = r.find("architecture")) {
    if (!a->is_array()) throw ConfigError("architecture", "expected an array of layer sizes");
    for (std::size_t i = 0; i < a->size(); ++i) {
      if (!(*a)[i].is_number_integer()) {
        throw ConfigError("architecture[" + std::to_string(i) + "]", "expected an integer");
      }
      c.architecture.push_back((*a)[i].get<int>());
    }
  }
  r.object("train", [&](ObjectReader& t) {
    t.read("learning_rate", c.learning_rate);
    t.read("batch_size", c.batch_size);
    t.read("holdout_fraction", c.holdout_fraction);
  });
  r.object("attack", [&](ObjectReader& a) {
    read_enum(a, "kind", c.attack.kind, attack_kind_from_string);
    a.read("noise_ratio", c.attack.noise_ratio);
    read_enum(a, "model_noise", c.attack.model_noise, model_noise_scale_from_string);
    a.read("colluding", c.attack.colluding);
    a.read("source_label", c.attack.source_label);
    a.read("target_label", c.attack.target_label);
    a.object("trigger", [&](ObjectReader& t) {
      t.read("size", c.attack.trigger.size);
      t.read("intensity", c.attack.trigger.intensity);
    });
  });
  r.read("pnr_percent", c.pnr_percent);
  r.object("aggregator", [&](ObjectReader& a) {
    read_enum(a, "name", c.aggregator.kind, aggregator_kind_from_string);
    if (const json* f = a.find("krum_f"); f && !f->is_null()) {
      int v = 0;
      a.read("krum_f", v);
      c.aggregator.krum_f = v;
    }
    a.read("trim_beta", c.aggregator.trim_beta);
    a.read("sentinel_threshold", c.aggregator.sentinel_threshold);
    a.read("fltrust_root_size", c.fltrust_root_size);
  });
  r.object("voyager", [&](ObjectReader& v) {
    v.read("enabled", c.voyager.enabled);
    v.read("tau", c.voyager.tau);
  });
  r.read("bandwidth_mbps", c.bandwidth_mbps);
  r.read("master_seed", c.master_seed);
  r.finish();
  validate_config(c);
  return c;
}

json config_as_json(const ScenarioConfig& c) {
  json j;
  j["paradigm"] = to_string(c.paradigm);
  j["topology"] = {{"name", to_string(c.topology.kind)}, {"k", c.topology.k}, {"p", c.topology.p},
                   {"hub", c.topology.hub}};
  j["n_clients"] = c.n_clients;
  j["rounds"] = c.rounds;
  j["epochs_per_round"] = c.epochs_per_round;
  json d = {{"name", to_string(c.dataset.kind)}, {"subsample", c.dataset.subsample}};
  if (c.dataset.kind == DatasetKind::synthetic) {
    const auto& s = c.dataset.synthetic;
    d["synthetic"] = {{"classes", s.classes}, {"per_class", s.per_class}, {"test_per_class", s.test_per_class},
                      {"dim", s.dim},         {"spread", s.spread},       {"seed", s.seed}};
    if (s.image_shape) {
      d["synthetic"]["image_height"] = s.image_shape->height;
      d["synthetic"]["image_width"] = s.image_shape->width;
    }
  } else {
    d["train_images"] = c.dataset.train_images.generic_string();
    d["train_labels"] = c.dataset.train_labels.generic_string();
    d["test_images"] = c.dataset.test_images.generic_string();
    d["test_labels"] = c.dataset.test_labels.generic_string();
  }
  j["dataset"] = d;
  j["architecture"] = c.architecture;
  j["train"] = {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
                {"holdout_fraction", c.holdout_fraction}};
  j["attack"] = {{"kind", to_string(c.attack.kind)},
                 {"noise_ratio", c.attack.noise_ratio},
                 {"model_noise", to_string(c.attack.model_noise)},
                 {"colluding", c.attack.colluding},
                 {"source_label", c.attack.source_label},
                 {"target_label", c.attack.target_label},
                 {"trigger", {{"size", c.attack.trigger.size}, {"intensity", c.attack.trigger.intensity}}}};
  j["pnr_percent"] = c.pnr_percent;
  j["aggregator"] = {{"name", to_string(c.aggregator.kind)},
                     {"krum_f", c.aggregator.krum_f ? json(*c.aggregator.krum_f) : json(nullptr)},
                     {"trim_beta", c.aggregator.trim_beta},
                     {"sentinel_threshold", c.aggregator.sentinel_threshold},
                     {"fltrust_root_size", c.fltrust_root_size}};
  j["voyager"] = {{"enabled", c.voyager.enabled}, {"tau", c.voyager.tau}};
  j["bandwidth_mbps"] = c.bandwidth_mbps;
  j["master_seed"] = c.master_seed;
  return j;
}

}  // namespace detail

void validate_config(const ScenarioConfig& c) {
  const bool dfl = c.paradigm == Paradigm::dfl;
  require(c.n_clients >= 1, "n_clients", "must be >= 1");
  if (dfl) {
    switch (c.topology.kind) {
      case TopologyKind::fully_connected:
        break;
      case TopologyKind::ring:
        require(c.n_clients >= 3, "n_clients", "ring needs at least 3 nodes");
        break;
      case TopologyKind::star:
        require(c.n_clients >= 2, "n_clients", "star needs at least 2 nodes");
        require(c.topology.hub >= 0 && c.topology.hub < c.n_clients, "topology.hub", "hub is not a node id");
        break;
      case TopologyKind::watts_strogatz:
        require(c.topology.k >= 2 && c.topology.k % 2 == 0, "topology.k", "must be even and >= 2");
        require(c.topology.k < c.n_clients, "topology.k", "must be smaller than n_clients");
        require(c.topology.p >= 0.0 && c.topology.p <= 1.0, "topology.p", "must be in [0, 1]");
        break;
    }
  }
  require(c.rounds >= 1, "rounds", "must be >= 1");
  require(c.epochs_per_round >= 1, "epochs_per_round", "must be >= 1");

  int input_dim = 784, labels = 10;
  if (c.dataset.kind == DatasetKind::synthetic) {
    const auto& s = c.dataset.synthetic;
    require(s.classes >= 2, "dataset.synthetic.classes", "must be >= 2");
    require(s.per_class >= 1, "dataset.synthetic.per_class", "must be >= 1");
    require(s.test_per_class >= 1, "dataset.synthetic.test_per_class", "must be >= 1");
    require(s.dim >= 1, "dataset.synthetic.dim", "must be >= 1");
    require(s.spread >= 0.0, "dataset.synthetic.spread", "must be >= 0");
    if (s.image_shape) {
      require(s.image_shape->height >= 1 && s.image_shape->width >= 1 &&
                  s.image_shape->height * s.image_shape->width == s.dim,
              "dataset.synthetic.image_height", "image_height * image_width must equal dim");
    }
    input_dim = s.dim;
    labels = s.classes;
  } else {
    for (auto [key, p] : {std::pair{"dataset.train_images", &c.dataset.train_images},
                          std::pair{"dataset.train_labels", &c.dataset.train_labels},
                          std::pair{"dataset.test_images", &c.dataset.test_images},
                          std::pair{"dataset.test_labels", &c.dataset.test_labels}}) {
      require(!p->empty(), key, "required for " + std::string(to_string(c.dataset.kind)));
      require(fs::is_regular_file(*p), key, "file not found: " + p->string());
    }
  }
  require(c.dataset.subsample > 0.0 && c.dataset.subsample <= 1.0, "dataset.subsample", "must be in (0, 1]");

  if (!c.architecture.empty()) {
    require(c.architecture.size() >= 2, "architecture", "needs at least input and output sizes");
    for (int s : c.architecture) require(s >= 1, "architecture", "layer sizes must be >= 1");
    require(c.architecture.front() == input_dim, "architecture",
            "input size must be " + std::to_string(input_dim));
    require(c.architecture.back() == labels, "architecture", "output size must be " + std::to_string(labels));
  }
  require(std::isfinite(c.learning_rate) && c.learning_rate >= 0.0, "train.learning_rate", "must be >= 0");
  require(c.batch_size >= 1, "train.batch_size", "must be >= 1");
  require(c.holdout_fraction >= 0.0 && c.holdout_fraction < 1.0, "train.holdout_fraction", "must be in [0, 1)");

  require(c.pnr_percent >= 0 && c.pnr_percent <= 90 && c.pnr_percent % 10 == 0, "pnr_percent",
          "must be a multiple of 10 between 0 and 90");
  const auto& a = c.attack;
  require(a.noise_ratio >= 0.0 && std::isfinite(a.noise_ratio), "attack.noise_ratio", "must be >= 0");
  if (a.kind == AttackKind::targeted_label_flip) {
    require(a.source_label >= 0 && a.source_label < labels, "attack.source_label", "not a valid label");
    require(a.source_label != a.target_label, "attack.target_label", "must differ from source_label");
  }
  if (a.kind == AttackKind::targeted_label_flip || a.kind == AttackKind::backdoor) {
    require(a.target_label >= 0 && a.target_label < labels, "attack.target_label", "not a valid label");
  }
  if (a.kind == AttackKind::backdoor) {
    require(a.trigger.size >= 1, "attack.trigger.size", "must be >= 1");
    require(a.trigger.intensity >= 0.0 && a.trigger.intensity <= 1.0, "attack.trigger.intensity",
            "must be in [0, 1]");
    if (c.dataset.kind == DatasetKind::synthetic) {
      require(c.dataset.synthetic.image_shape.has_value(), "dataset.synthetic.image_height",
              "backdoor needs an image shape");
    }
  }

  const auto& g = c.aggregator;
  if (g.krum_f) require(*g.krum_f >= 0, "aggregator.krum_f", "must be >= 0");
  require(g.trim_beta >= 0.0 && g.trim_beta < 0.5, "aggregator.trim_beta", "must be in [0, 0.5)");
  require(g.sentinel_threshold >= -1.0 && g.sentinel_threshold <= 1.0, "aggregator.sentinel_threshold",
          "must be in [-1, 1]");
  require(c.fltrust_root_size >= 1, "aggregator.fltrust_root_size", "must be >= 1");
  if (g.kind == AggregatorKind::sentinel) {
    require(c.holdout_fraction > 0.0, "train.holdout_fraction", "sentinel needs a local validation split");
  }
  require(c.voyager.tau >= -1.0 && c.voyager.tau <= 1.0, "voyager.tau", "must be in [-1, 1]");
  if (!dfl) {
    require(g.kind != AggregatorKind::sentinel && g.kind != AggregatorKind::voyager, "aggregator.name",
            "only available with paradigm dfl");
    require(!c.voyager.enabled, "voyager.enabled", "only available with paradigm dfl");
  }
  require(c.bandwidth_mbps > 0.0 && std::isfinite(c.bandwidth_mbps), "bandwidth_mbps", "must be > 0");
}

ScenarioConfig parse_config_text(std::string_view text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  return detail::config_from_json(j, base_dir);
}

ScenarioConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.parent_path());
}

std::string config_to_json(const ScenarioConfig& cfg) { return detail::config_as_json(cfg).dump(); }

std::string scenario_id(const ScenarioConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dflsim
