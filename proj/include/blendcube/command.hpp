#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "blendcube/algebra.hpp"
#include "blendcube/mtable.hpp"

namespace blendcube {

enum class Verb { Nop, Load, Display, Drilldown, Rollup, Rotate, Blend, Restrict, Show, Sql, Undo, Save, Quit };
enum class LoadKind { Schema, Data, Dataset };

struct Command {
    Verb verb = Verb::Nop;

    // LOAD
    LoadKind load = LoadKind::Dataset;
    std::string table;
    std::string path;  // also SAVE

    // DISPLAY
    std::string fact;
    std::vector<MeasureRef> measures;
    AxisChoice lines;
    AxisChoice columns;

    // DRILLDOWN / ROLLUP: dimension, param. ROTATE: dimension (old), param (new), hierarchy.
    // RESTRICT: dimension, pred.
    std::string dimension;
    std::string param;
    std::string hierarchy;
    Predicate pred;

    BlendRequest blend;

    friend bool operator==(const Command&, const Command&) = default;
};

// One command per line. Blank lines and lines starting with '#' or '--' are Nop.
// Throws ParseError with a 1-based column.
Command parse_command(std::string_view line);

// Canonical text; parse_command(render_command(c)) == c.
std::string render_command(const Command& c);

std::string_view verb_name(Verb v);

// True for the verbs that transform the current table.
bool is_table_operation(Verb v);

// Applies DISPLAY, DRILLDOWN, ROLLUP, ROTATE, BLEND or RESTRICT. current may be null only for DISPLAY.
MTable apply_operation(const Command& c, const MTable* current, const Constellation& constellation);

}  // namespace blendcube
