// Copyright 2026 The compact-slt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slt/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "slt/error.h"

namespace slt {
namespace {

constexpr char kMagic[8] = {'S', 'L', 'T', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params,
                     const Vocab& vocab, const nlohmann::json& meta) {
  if (vocab.size() != params.config.vocab_size) {
    fail(ErrorCode::kSchema, "vocabulary has " + std::to_string(vocab.size()) +
                                 " entries but the model expects " +
                                 std::to_string(params.config.vocab_size));
  }
  nlohmann::json header;
  header["config"] = params.config;
  header["vocab_hash"] = vocab.hash();
  header["vocab"] = vocab.to_tsv();
  header["tensors"] = nlohmann::json::array();
  for (const TensorShape& t : tensor_inventory(params)) {
    header["tensors"].push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}});
  }
  header["meta"] = meta;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for_each_tensor(params, [&](const std::string&, const Mat<float>& t, int) {
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
  });
  if (!out) fail(ErrorCode::kIo, "failed while writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    fail(ErrorCode::kSchema, path.string() + " is not a checkpoint");
  }
  const std::uint64_t len = get_u64(in);
  if (!in || len > (std::uint64_t{1} << 32)) {
    fail(ErrorCode::kSchema, "corrupt checkpoint header in " + path.string());
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) fail(ErrorCode::kSchema, "truncated checkpoint header in " + path.string());

  Checkpoint ck;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
    ModelConfig config = header.at("config").get<ModelConfig>();
    config.validate();
    ck.params = allocate_params<float>(config);
    ck.vocab = Vocab::from_tsv(header.at("vocab").get<std::string>());
    if (ck.vocab.hash() != header.at("vocab_hash").get<std::uint64_t>()) {
      fail(ErrorCode::kSchema, "vocabulary hash mismatch in " + path.string());
    }
    if (header.contains("meta")) ck.meta = header["meta"];
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchema, "bad checkpoint header in " + path.string() + ": " + e.what());
  }
  if (ck.vocab.size() != ck.params.config.vocab_size) {
    fail(ErrorCode::kSchema, "checkpoint vocabulary size disagrees with its config");
  }

  const auto expected = tensor_inventory(ck.params);
  const auto& listed = header.at("tensors");
  if (listed.size() != expected.size()) {
    fail(ErrorCode::kSchema, "checkpoint lists " + std::to_string(listed.size()) +
                                 " tensors, config implies " + std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& t = listed[i];
    const auto shape = t.at("shape").get<std::vector<long>>();
    if (t.at("name").get<std::string>() != expected[i].name || shape.size() != 2 ||
        shape[0] != expected[i].rows || shape[1] != expected[i].cols) {
      fail(ErrorCode::kSchema, "tensor " + std::to_string(i) + " (" + expected[i].name +
                                   ") does not match the config");
    }
  }
  for_each_tensor(ck.params, [&](const std::string& name, Mat<float>& t, int) {
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
    if (!in) fail(ErrorCode::kSchema, "checkpoint payload truncated at " + name);
  });
  in.peek();
  if (!in.eof()) fail(ErrorCode::kSchema, "trailing bytes after checkpoint payload");
  return ck;
}

}  // namespace slt
