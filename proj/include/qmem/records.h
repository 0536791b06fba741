// Copyright 2026 The qmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QMEM_RECORDS_H
#define QMEM_RECORDS_H

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmem/analysis.h"
#include "qmem/experiments.h"

namespace qmem {

using Json = nlohmann::ordered_json;

inline constexpr const char *RECORDS_SCHEMA = "qmem.records/1";
inline constexpr const char *FIT_SCHEMA = "qmem.fit/1";
inline constexpr const char *MANIFEST_SCHEMA = "qmem.manifest/1";
inline constexpr const char *FIGURE_SCHEMA = "qmem.figure-csv/1";

/// Malformed input file; the message names the line and field.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RbRecordLine {
    size_t point = 0;
    double field_offset = 0;  // mG
    SequenceRecord rec;
};

struct RamseyRecordLine {
    size_t point = 0;
    bool echo = false;
    uint64_t seed = 0;
    RamseyResult result;
};

/// A JSON-lines record file: one header object, then one object per record.
struct RecordFile {
    Json header;
    std::vector<RbRecordLine> rb;
    std::vector<RamseyRecordLine> ramsey;
};

Json to_json(const RbRecordLine &line);
Json to_json(const RamseyRecordLine &line);
std::string serialize_records(const RecordFile &file);
RecordFile parse_records(std::istream &in);
RecordFile read_records_file(const std::string &path);

Json to_json(const RbDecayFit &fit);
RbDecayFit rb_fit_from_json(const Json &j);
Json to_json(const DecoherenceFit &fit);
DecoherenceFit decoherence_fit_from_json(const Json &j);
Json to_json(const NoiseModel &m);
NoiseModel noise_model_from_json(const Json &j);

/// Simple numeric CSV table with a header row; '#' lines are comments.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string serialize_csv(const CsvTable &t);
CsvTable parse_csv(std::istream &in);

/// Writes via a temporary file in the same directory and renames it into
/// place. Creates parent directories.
void write_file_atomic(const std::string &path, const std::string &contents);
std::string read_file(const std::string &path);
std::string sha256_hex(const std::string &data);

}  // namespace qmem

#endif
