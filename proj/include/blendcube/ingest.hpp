#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "blendcube/model.hpp"
#include "blendcube/mtable.hpp"

namespace blendcube {

// RFC-4180 CSV: comma separated, double-quote quoting, CRLF or LF line ends.
std::vector<std::vector<std::string>> parse_csv(std::string_view text, const std::string& source = "<csv>");
std::string csv_escape(std::string_view field);

// Schema descriptor (JSON, see docs/schema-format.md) to an instance-free constellation.
Constellation parse_schema(std::string_view json_text, const std::string& source = "<schema>");
Constellation load_schema(const std::filesystem::path& path);
std::string schema_to_json(const Constellation& c);

// Accumulates instances for a schema; seal() is the only way to obtain a usable constellation.
class Loader {
public:
    explicit Loader(Constellation schema);

    // table is a table name (GEOGRAPHIES) or a dimension / fact name. Returns the rows appended.
    std::size_t load_csv(const std::string& table, const std::filesystem::path& path);
    std::size_t load_csv_text(const std::string& table, std::string_view text, const std::string& source = "<csv>");

    // Resolves links and validates; throws ValidationError. The loader cannot be reused afterwards.
    std::shared_ptr<const Constellation> seal();

    const Constellation& pending() const { return data_; }
    bool sealed() const { return sealed_; }

private:
    Constellation data_;
    bool sealed_ = false;
};

// Reads <dir>/schema.json and one <TABLE>.csv per dimension and fact, then seals.
std::shared_ptr<const Constellation> load_dataset(const std::filesystem::path& dir);

// Writes schema.json and one CSV per table.
void write_dataset(const Constellation& c, const std::filesystem::path& dir);

// The OGM parcel star of the worked examples: fact Repartition over Dates, Organismes and
// Geographies, with parcel-level rows whose (Variete, Etat) SUM roll-up equals the
// reference T2 table. Throws if that roll-up check ever fails.
std::shared_ptr<const Constellation> sample_constellation();
std::string sample_schema_json();
void generate_sample_dataset(const std::filesystem::path& dir);

// Reference T2 cells (Variete, Etat) -> Superficie; absent pairs are blank cells.
struct T2Cell {
    std::string variete;
    std::string etat;
    double superficie;
};
const std::vector<T2Cell>& t2_cells();

enum class Skew { Homogeneous, LargeSup, SmallSup, EmptySup, EmptyInf };

std::string_view to_string(Skew s);
Skew parse_skew(std::string_view text);

struct BenchOptions {
    std::size_t n_geo = 10;
    std::uint64_t seed = 42;
    std::size_t organisms = 250;
    std::size_t months = 12;
    Skew skew = Skew::Homogeneous;
    bool allow_any_size = false;
};

struct BenchDataset {
    std::shared_ptr<const Constellation> constellation;
    std::string predicate;  // blend predicate over Geographies for BLEND(Pays, Etat)
    std::size_t e_sup_size = 0;
    std::size_t e_inf_size = 0;
};

inline constexpr std::size_t kBenchMinGeo = 10;
inline constexpr std::size_t kBenchMaxGeo = 100;

// |REPARTITION| = organisms x n_geo; seeded and reproducible.
BenchDataset generate_bench_dataset(const BenchOptions& options);

// Copy of c in which the blend levels of the given axis are stored as attributes and the axis's
// effective path becomes a new hierarchy. Returns the sealed copy.
std::shared_ptr<const Constellation> materialize_axis(const Constellation& c, const AxisSpec& axis,
                                                      const std::string& hierarchy_name);

}  // namespace blendcube
