#pragma once

#include <json.hpp>

#include "ospde/grid.hpp"

namespace testing {

inline ospde::SpaceTimeGrid line(double lo, double hi, std::size_t nodes, std::size_t steps, double horizon,
                                 double core_margin = -1.0) {
    return ospde::SpaceTimeGrid({{lo, hi, nodes}}, steps, horizon, core_margin);
}

inline nlohmann::json grid_block(double lo, double hi, std::size_t nodes, std::size_t steps, double horizon) {
    return {{"axes", {{{"lower", lo}, {"upper", hi}, {"nodes", nodes}}}}, {"time_steps", steps}, {"horizon", horizon}};
}

inline nlohmann::json zero_problem(std::size_t nodes = 60, std::size_t steps = 20) {
    return {{"grid", grid_block(-2, 2, nodes, steps, 0.25)},
            {"coefficients", {{"f", {{"family", "zero"}}}}},
            {"terminal", {{"family", "zero"}}},
            {"obstacle", {{"family", "constant"}, {"value", -1e6}}}};
}

inline nlohmann::json put_problem(std::size_t nodes, std::size_t steps) {
    return {{"grid", grid_block(-3, 3, nodes, steps, 0.25)},
            {"coefficients", {{"f", {{"family", "zero"}}}}},
            {"terminal", {{"family", "put"}, {"strike", 1}}},
            {"obstacle", {{"family", "put"}, {"strike", 1}}}};
}

}  // namespace testing
