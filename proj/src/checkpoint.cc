#include "mice/checkpoint.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "binary_io.h"

namespace mice {
namespace {

constexpr char kMagic[8] = {'M', 'I', 'C', 'E', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

std::string Exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::string& Require(const std::map<std::string, std::string>& meta,
                           const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint metadata lacks '" + key + "'");
  return it->second;
}

}  // namespace

std::map<std::string, std::string> DescribeConfig(const TrainConfig& c) {
  return {
      {"epochs", std::to_string(c.epochs)},
      {"learning_rate", Exact(c.learning_rate)},
      {"rho", Exact(c.rho)},
      {"epsilon", Exact(c.epsilon)},
      {"batch_size", std::to_string(c.batch_size)},
      {"seed", std::to_string(c.seed)},
      {"clip_norm", c.clip_norm ? Exact(*c.clip_norm) : "none"},
      {"hidden", std::to_string(c.hidden)},
      {"dropout", Exact(c.dropout)},
  };
}

void SaveCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ostringstream meta;
  auto fields = DescribeConfig(checkpoint.config);
  fields["task"] = TaskName(checkpoint.task);
  fields["input_dim"] = std::to_string(checkpoint.model.input_dim());
  fields["provider_tag"] = checkpoint.provider_tag;
  for (const auto& [k, v] : fields) meta << k << '=' << v << '\n';

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  binary::Writer w(out);
  w.Raw(kMagic, sizeof(kMagic));
  w.U32(kVersion);
  w.String32(meta.str());
  std::uint32_t count = 0;
  ForEachTensor(checkpoint.model.params(), [&](const std::string&, const auto&) { ++count; });
  w.U32(count);
  ForEachTensor(checkpoint.model.params(), [&](const std::string& name, const auto& t) {
    w.String16(name, "tensor name");
    w.U32(static_cast<std::uint32_t>(t.rows()));
    w.U32(static_cast<std::uint32_t>(t.cols()));
    for (Eigen::Index i = 0; i < t.size(); ++i) w.F64(t.data()[i]);
  });
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  binary::Reader r = binary::Reader::FromFile(path.string());
  try {
    if (r.remaining() < sizeof(kMagic) ||
        r.Bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
      throw FormatError("bad magic (not a checkpoint)");
    }
    if (r.U32() != kVersion) throw FormatError("unsupported checkpoint version");
    std::map<std::string, std::string> meta;
    std::istringstream lines(r.String32());
    std::string line;
    while (std::getline(lines, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError("bad metadata line '" + line + "'");
      meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
    Checkpoint cp;
    cp.task = ParseTask(Require(meta, "task"));
    cp.provider_tag = meta.count("provider_tag") ? meta["provider_tag"] : "";
    cp.config.epochs = std::stoi(Require(meta, "epochs"));
    cp.config.learning_rate = std::stod(Require(meta, "learning_rate"));
    cp.config.rho = std::stod(Require(meta, "rho"));
    cp.config.epsilon = std::stod(Require(meta, "epsilon"));
    cp.config.batch_size = std::stoul(Require(meta, "batch_size"));
    cp.config.seed = std::stoull(Require(meta, "seed"));
    const std::string& clip = Require(meta, "clip_norm");
    if (clip != "none") cp.config.clip_norm = std::stod(clip);
    cp.config.hidden = std::stoul(Require(meta, "hidden"));
    cp.config.dropout = std::stod(Require(meta, "dropout"));
    const std::size_t input_dim = std::stoul(Require(meta, "input_dim"));

    BiGruParams params = BiGruParams::Zeros(input_dim, cp.config.hidden);
    std::uint32_t expected = 0;
    ForEachTensor(params, [&](const std::string&, const auto&) { ++expected; });
    if (r.U32() != expected) throw FormatError("unexpected tensor count");
    ForEachTensor(params, [&](const std::string& name, auto& t) {
      if (r.String16() != name) throw FormatError("tensor order mismatch at " + name);
      const std::uint32_t rows = r.U32();
      const std::uint32_t cols = r.U32();
      if (rows != t.rows() || cols != t.cols()) {
        throw FormatError("shape mismatch for " + name);
      }
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = r.F64();
    });
    if (r.remaining() != 0) throw FormatError("trailing bytes in checkpoint");
    cp.model = BiGruModel(std::move(params), cp.config.dropout);
    return cp;
  } catch (const FormatError& e) {
    throw e.WithContext(path.string());
  } catch (const std::logic_error& e) {
    throw FormatError(path.string() + ": bad metadata value (" + e.what() + ")");
  }
}

}  // namespace mice
