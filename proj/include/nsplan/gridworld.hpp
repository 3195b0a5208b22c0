#pragma once

#include <map>
#include <string>
#include <vector>

#include "nsplan/mdp.hpp"

namespace nsplan {

/// Grid movement actions shared by all bundled environments.
enum class Move : ActionId { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr int kNumMoves = 4;

const char* move_name(Move m);

enum class Cell : char { Start = 'S', Goal = 'G', Hole = 'H', Cliff = 'C', Free = 'F' };

/// Rectangular cell grid. Goal, hole and cliff cells are terminal.
struct GridLayout {
    int width = 0;
    int height = 0;
    std::vector<Cell> cells;  // row-major
    std::string name;

    Cell at(int row, int col) const { return cells[static_cast<std::size_t>(row) * width + col]; }
    StateId state_of(int row, int col) const { return row * width + col; }
    int row_of(StateId s) const { return s / width; }
    int col_of(StateId s) const { return s % width; }
    int num_states() const { return width * height; }

    StateId start() const;
    bool terminal(StateId s) const;
    bool goal(StateId s) const { return cells[static_cast<std::size_t>(s)] == Cell::Goal; }
    bool hole_or_cliff(StateId s) const {
        const Cell c = cells[static_cast<std::size_t>(s)];
        return c == Cell::Hole || c == Cell::Cliff;
    }

    /// Exactly one start, at least one goal, start non-terminal.
    void validate() const;

    /// One character per cell (S, G, H, C, F), one row per line.
    static GridLayout from_text(const std::string& text, std::string name = "layout");
    std::string to_text() const;
};

/// How the agent's realized motion deviates from its intent.
///   Perpendicular: intended with p, each perpendicular with (1-p)/2.
///   Opposite:      intended with p, opposite with 1-p.
struct SlipModel {
    enum class Kind { Perpendicular, Opposite };
    Kind kind = Kind::Perpendicular;
    double p = 0.7;
};

struct RewardScale {
    double goal = 1.0;
    double hole = -1.0;
    double step = 0.0;
};

/// A ground-truth generative model: layout + slip model + reward scale.
class EnvironmentInstance {
  public:
    EnvironmentInstance() = default;
    EnvironmentInstance(GridLayout layout, SlipModel slip, RewardScale rewards);

    const GridLayout& layout() const { return layout_; }
    const SlipModel& slip() const { return slip_; }
    const RewardScale& rewards() const { return rewards_; }

    EnvironmentInstance with_slip(double p) const;

    /// Realizes slip model and wall-bump handling as an explicit MDP.
    /// Off-grid moves keep the agent in place; terminal states absorb.
    MdpSnapshot build_mdp(double gamma) const;

    /// Cells reachable from (s, a) under any slip probability in (0, 1);
    /// sorted, deduplicated after wall clamping. This is the structural
    /// support a belief is defined over.
    std::vector<StateId> reachable_successors(StateId s, ActionId a) const;

    struct StepResult {
        StateId next;
        double reward;
        bool terminal;
    };
    /// Samples one generative step; distribution matches build_mdp exactly.
    StepResult step(StateId s, ActionId a, Rng& rng) const;

    /// Round-trips (environment name, slip, gamma placeholder, reward scale)
    /// through a small key/value text block.
    std::string to_text() const;
    static EnvironmentInstance from_text(const std::string& text);

  private:
    GridLayout layout_;
    SlipModel slip_;
    RewardScale rewards_;
};

/// The three bundled benchmark environments at slip probability p:
///   frozen_lake_4x4  canonical 4x4 lake, perpendicular slips
///   cliff_walking    4x12 grid with a cliff row and per-step penalty
///   ns_bridge        guarded bridge corridor with an extra hole sealing the
///                    upper bypass at its midpoint, opposite slips
std::map<std::string, EnvironmentInstance> standard_layouts(double p = 0.7);

/// Lookup into standard_layouts; throws std::invalid_argument with the list
/// of known names on a miss.
EnvironmentInstance make_environment(const std::string& name, double p);

}  // namespace nsplan
