#include "stga/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace stga {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; byte swap not implemented");

constexpr char kMagic[] = "STGA1";

void write_row_major(std::ofstream& out, const Mat& m) {
  // Eigen stores column-major; serialize rows to honor the record layout.
  std::vector<double> row(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double) * row.size()));
  }
}

Mat read_row_major(std::ifstream& in, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  std::vector<double> row(cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * row.size()));
    if (!in) {
      throw IoError("checkpoint: truncated block payload");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[j];
  }
  return m;
}

}  // namespace

void write_blocks(const std::filesystem::path& file,
                  const std::vector<std::pair<std::string, const Mat*>>& blocks) {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + file.string());
  }
  out << kMagic << "\n";
  for (const auto& [name, m] : blocks) {
    out << name << "\t2\t" << m->rows() << "\t" << m->cols() << "\n";
    write_row_major(out, *m);
  }
  out << "END\n";
  if (!out) {
    throw IoError("short write to " + file.string());
  }
}

std::vector<std::pair<std::string, Mat>> read_blocks(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + file.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw IoError(file.string() + ": bad checkpoint magic");
  }
  std::vector<std::pair<std::string, Mat>> blocks;
  while (std::getline(in, line)) {
    if (line == "END") {
      return blocks;
    }
    // name \t rank \t dims...
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t tab = line.find('\t', pos);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    if (fields.size() < 3) {
      throw IoError(file.string() + ": malformed block record '" + line + "'");
    }
    const int rank = std::stoi(fields[1]);
    if (rank != 2 || fields.size() != 4) {
      throw IoError(file.string() + ": unsupported block rank in '" + line + "'");
    }
    const long rows = std::stol(fields[2]);
    const long cols = std::stol(fields[3]);
    if (rows < 0 || cols < 0) {
      throw IoError(file.string() + ": negative dims in '" + line + "'");
    }
    blocks.emplace_back(fields[0], read_row_major(in, rows, cols));
  }
  throw IoError(file.string() + ": missing END record");
}

void save_checkpoint(const std::filesystem::path& file, const ModelParams& params) {
  std::vector<std::pair<std::string, const Mat*>> blocks;
  params.visit([&blocks](const char* name, const Mat& m) { blocks.emplace_back(name, &m); });
  write_blocks(file, blocks);
}

ModelParams load_checkpoint(const std::filesystem::path& file, const ModelConfig* expect) {
  auto blocks = read_blocks(file);
  std::map<std::string, Mat> by_name;
  for (auto& [name, m] : blocks) {
    by_name.emplace(std::move(name), std::move(m));
  }
  ModelParams params;
  params.visit([&](const char* name, Mat& m) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw IoError(file.string() + ": missing parameter block " + name);
    }
    m = std::move(it->second);
    by_name.erase(it);
  });
  if (!by_name.empty()) {
    throw IoError(file.string() + ": unexpected parameter block " + by_name.begin()->first);
  }
  const CheckpointInfo info = checkpoint_info(params);
  if (info.hidden_size < 1 || info.embed_size < 1 ||
      params.lstm_node.w_input.cols() != 2 * info.embed_size + 2 * info.hidden_size ||
      params.head.w.rows() != 5) {
    throw IoError(file.string() + ": inconsistent block shapes");
  }
  if (expect != nullptr &&
      (expect->hidden_size != info.hidden_size || expect->embed_size != info.embed_size)) {
    throw IoError(file.string() + ": checkpoint sized H=" + std::to_string(info.hidden_size) +
                  ", D=" + std::to_string(info.embed_size) + " but config expects H=" +
                  std::to_string(expect->hidden_size) + ", D=" +
                  std::to_string(expect->embed_size));
  }
  return params;
}

CheckpointInfo checkpoint_info(const ModelParams& params) {
  CheckpointInfo info;
  info.hidden_size = static_cast<int>(params.lstm_node.w_hidden.cols());
  info.embed_size = static_cast<int>(params.embed_spatial.w.rows());
  return info;
}

void save_train_state(const std::filesystem::path& file, const nn::AdamState& adam, int epoch) {
  std::vector<std::pair<std::string, const Mat*>> blocks;
  Mat meta(2, 1);
  meta(0, 0) = static_cast<double>(adam.step);
  meta(1, 0) = static_cast<double>(epoch);
  blocks.emplace_back("meta", &meta);
  for (std::size_t i = 0; i < adam.m.size(); ++i) {
    blocks.emplace_back("m." + std::to_string(i), &adam.m[i]);
    blocks.emplace_back("v." + std::to_string(i), &adam.v[i]);
  }
  write_blocks(file, blocks);
}

bool load_train_state(const std::filesystem::path& file, nn::AdamState& adam, int& epoch) {
  if (!std::filesystem::exists(file)) {
    return false;
  }
  auto blocks = read_blocks(file);
  adam.m.clear();
  adam.v.clear();
  for (auto& [name, m] : blocks) {
    if (name == "meta") {
      adam.step = static_cast<int>(m(0, 0));
      epoch = static_cast<int>(m(1, 0));
    } else if (name.rfind("m.", 0) == 0) {
      adam.m.push_back(std::move(m));
    } else if (name.rfind("v.", 0) == 0) {
      adam.v.push_back(std::move(m));
    } else {
      throw IoError(file.string() + ": unexpected train-state block " + name);
    }
  }
  return true;
}

}  // namespace stga
