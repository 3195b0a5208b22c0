#include "nsplan/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nsplan {

const char* move_name(Move m) {
    switch (m) {
        case Move::Up: return "up";
        case Move::Down: return "down";
        case Move::Left: return "left";
        case Move::Right: return "right";
    }
    return "?";
}

StateId GridLayout::start() const {
    for (StateId s = 0; s < num_states(); ++s)
        if (cells[static_cast<std::size_t>(s)] == Cell::Start) return s;
    throw std::logic_error("layout has no start cell");
}

bool GridLayout::terminal(StateId s) const {
    const Cell c = cells[static_cast<std::size_t>(s)];
    return c == Cell::Goal || c == Cell::Hole || c == Cell::Cliff;
}

void GridLayout::validate() const {
    if (width <= 0 || height <= 0 || cells.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("layout dimensions do not match cell count");
    int starts = 0, goals = 0;
    for (Cell c : cells) {
        if (c == Cell::Start) ++starts;
        if (c == Cell::Goal) ++goals;
    }
    if (starts != 1) throw std::invalid_argument("layout must have exactly one start");
    if (goals < 1) throw std::invalid_argument("layout must have at least one goal");
    if (terminal(start())) throw std::invalid_argument("start cell must not be terminal");
}

GridLayout GridLayout::from_text(const std::string& text, std::string name) {
    GridLayout layout;
    layout.name = std::move(name);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        if (layout.width == 0) layout.width = static_cast<int>(line.size());
        if (static_cast<int>(line.size()) != layout.width)
            throw std::invalid_argument("ragged layout rows");
        for (char ch : line) {
            switch (ch) {
                case 'S': layout.cells.push_back(Cell::Start); break;
                case 'G': layout.cells.push_back(Cell::Goal); break;
                case 'H': layout.cells.push_back(Cell::Hole); break;
                case 'C': layout.cells.push_back(Cell::Cliff); break;
                case 'F': layout.cells.push_back(Cell::Free); break;
                default: throw std::invalid_argument(std::string("unknown cell char '") + ch + "'");
            }
        }
        ++layout.height;
    }
    layout.validate();
    return layout;
}

std::string GridLayout::to_text() const {
    std::string out;
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) out.push_back(static_cast<char>(at(r, c)));
        out.push_back('\n');
    }
    return out;
}

namespace {

struct Delta {
    int dr, dc;
};

Delta move_delta(Move m) {
    switch (m) {
        case Move::Up: return {-1, 0};
        case Move::Down: return {1, 0};
        case Move::Left: return {0, -1};
        case Move::Right: return {0, 1};
    }
    return {0, 0};
}

Move opposite(Move m) {
    switch (m) {
        case Move::Up: return Move::Down;
        case Move::Down: return Move::Up;
        case Move::Left: return Move::Right;
        case Move::Right: return Move::Left;
    }
    return m;
}

std::pair<Move, Move> perpendicular(Move m) {
    switch (m) {
        case Move::Up:
        case Move::Down: return {Move::Left, Move::Right};
        case Move::Left:
        case Move::Right: return {Move::Up, Move::Down};
    }
    return {m, m};
}

/// Moving off-grid keeps the agent in place.
StateId clamp_move(const GridLayout& layout, StateId s, Move m) {
    const Delta d = move_delta(m);
    const int r = layout.row_of(s) + d.dr;
    const int c = layout.col_of(s) + d.dc;
    if (r < 0 || r >= layout.height || c < 0 || c >= layout.width) return s;
    return layout.state_of(r, c);
}

}  // namespace

EnvironmentInstance::EnvironmentInstance(GridLayout layout, SlipModel slip, RewardScale rewards)
    : layout_(std::move(layout)), slip_(slip), rewards_(rewards) {
    layout_.validate();
    if (slip_.p < 0.0 || slip_.p > 1.0) throw std::invalid_argument("slip p must lie in [0,1]");
}

EnvironmentInstance EnvironmentInstance::with_slip(double p) const {
    EnvironmentInstance copy(*this);
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("slip p must lie in [0,1]");
    copy.slip_.p = p;
    return copy;
}

MdpSnapshot EnvironmentInstance::build_mdp(double gamma) const {
    MdpSnapshot mdp(layout_.num_states(), kNumMoves, gamma);
    for (StateId s = 0; s < layout_.num_states(); ++s)
        if (layout_.terminal(s)) mdp.set_terminal(s);
    for (StateId s = 0; s < layout_.num_states(); ++s) {
        if (layout_.terminal(s)) continue;
        for (ActionId a = 0; a < kNumMoves; ++a) {
            const Move m = static_cast<Move>(a);
            std::vector<StateId> succ;
            std::vector<double> prob;
            if (slip_.kind == SlipModel::Kind::Perpendicular) {
                const auto [left, right] = perpendicular(m);
                succ = {clamp_move(layout_, s, m), clamp_move(layout_, s, left),
                        clamp_move(layout_, s, right)};
                prob = {slip_.p, (1.0 - slip_.p) / 2.0, (1.0 - slip_.p) / 2.0};
            } else {
                succ = {clamp_move(layout_, s, m), clamp_move(layout_, s, opposite(m))};
                prob = {slip_.p, 1.0 - slip_.p};
            }
            std::vector<double> reward(succ.size());
            for (std::size_t i = 0; i < succ.size(); ++i) {
                if (layout_.goal(succ[i]))
                    reward[i] = rewards_.goal;
                else if (layout_.hole_or_cliff(succ[i]))
                    reward[i] = rewards_.hole;
                else
                    reward[i] = rewards_.step;
            }
            mdp.set_transition(s, a, succ, prob, reward);
        }
    }
    mdp.validate();
    return mdp;
}

std::vector<StateId> EnvironmentInstance::reachable_successors(StateId s, ActionId a) const {
    const Move m = static_cast<Move>(a);
    std::vector<StateId> succ;
    succ.push_back(clamp_move(layout_, s, m));
    if (slip_.kind == SlipModel::Kind::Perpendicular) {
        const auto [left, right] = perpendicular(m);
        succ.push_back(clamp_move(layout_, s, left));
        succ.push_back(clamp_move(layout_, s, right));
    } else {
        succ.push_back(clamp_move(layout_, s, opposite(m)));
    }
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    return succ;
}

EnvironmentInstance::StepResult EnvironmentInstance::step(StateId s, ActionId a, Rng& rng) const {
    if (layout_.terminal(s)) throw std::logic_error("step from terminal state");
    // sample through the same distribution build_mdp constructs
    const Move m = static_cast<Move>(a);
    double u = uniform01(rng);
    StateId next;
    if (slip_.kind == SlipModel::Kind::Perpendicular) {
        const auto [left, right] = perpendicular(m);
        if (u < slip_.p)
            next = clamp_move(layout_, s, m);
        else if (u < slip_.p + (1.0 - slip_.p) / 2.0)
            next = clamp_move(layout_, s, left);
        else
            next = clamp_move(layout_, s, right);
    } else {
        next = u < slip_.p ? clamp_move(layout_, s, m) : clamp_move(layout_, s, opposite(m));
    }
    double reward;
    if (layout_.goal(next))
        reward = rewards_.goal;
    else if (layout_.hole_or_cliff(next))
        reward = rewards_.hole;
    else
        reward = rewards_.step;
    return {next, reward, layout_.terminal(next)};
}

std::string EnvironmentInstance::to_text() const {
    std::ostringstream out;
    out << "name " << layout_.name << "\n";
    out << "slip " << (slip_.kind == SlipModel::Kind::Perpendicular ? "perpendicular" : "opposite")
        << " " << slip_.p << "\n";
    out << "rewards " << rewards_.goal << " " << rewards_.hole << " " << rewards_.step << "\n";
    out << "grid\n" << layout_.to_text();
    return out.str();
}

EnvironmentInstance EnvironmentInstance::from_text(const std::string& text) {
    std::istringstream in(text);
    std::string keyword;
    std::string name = "layout";
    SlipModel slip;
    RewardScale rewards;
    while (in >> keyword) {
        if (keyword == "name") {
            in >> name;
        } else if (keyword == "slip") {
            std::string kind;
            in >> kind >> slip.p;
            if (kind == "perpendicular")
                slip.kind = SlipModel::Kind::Perpendicular;
            else if (kind == "opposite")
                slip.kind = SlipModel::Kind::Opposite;
            else
                throw std::invalid_argument("unknown slip kind: " + kind);
        } else if (keyword == "rewards") {
            in >> rewards.goal >> rewards.hole >> rewards.step;
        } else if (keyword == "grid") {
            std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            return EnvironmentInstance(GridLayout::from_text(rest, name), slip, rewards);
        } else {
            throw std::invalid_argument("unknown keyword in environment text: " + keyword);
        }
    }
    throw std::invalid_argument("environment text has no grid section");
}

namespace {

// Canonical 4x4 lake map with four holes.
constexpr const char* kFrozenLake =
    "SFFF\n"
    "FHFH\n"
    "FFFH\n"
    "HFFG\n";

// 4x12 grid; the cliff spans the bottom row between start and goal.
constexpr const char* kCliffWalking =
    "FFFFFFFFFFFF\n"
    "FFFFFFFFFFFF\n"
    "FFFFFFFFFFFF\n"
    "SCCCCCCCCCCG\n";

// Guarded two-lane bridge. The upper bypass lane is sealed by an extra hole
// adjacent to the corridor midpoint, and the cell left of the start is a
// hole, so no policy is entirely safe.
constexpr const char* kNsBridge =
    "HHHHHHHHH\n"
    "HFFFHFFFH\n"
    "HSFFFFFFG\n"
    "HHHHHHHHH\n";

}  // namespace

std::map<std::string, EnvironmentInstance> standard_layouts(double p) {
    std::map<std::string, EnvironmentInstance> envs;
    envs.emplace("frozen_lake_4x4",
                 EnvironmentInstance(GridLayout::from_text(kFrozenLake, "frozen_lake_4x4"),
                                     SlipModel{SlipModel::Kind::Perpendicular, p},
                                     RewardScale{1.0, -1.0, 0.0}));
    envs.emplace("cliff_walking",
                 EnvironmentInstance(GridLayout::from_text(kCliffWalking, "cliff_walking"),
                                     SlipModel{SlipModel::Kind::Perpendicular, p},
                                     RewardScale{1.0, -1.0, -0.01}));
    envs.emplace("ns_bridge",
                 EnvironmentInstance(GridLayout::from_text(kNsBridge, "ns_bridge"),
                                     SlipModel{SlipModel::Kind::Opposite, p},
                                     RewardScale{1.0, -1.0, 0.0}));
    return envs;
}

EnvironmentInstance make_environment(const std::string& name, double p) {
    auto envs = standard_layouts(p);
    auto it = envs.find(name);
    if (it == envs.end()) {
        std::string known;
        for (const auto& [k, v] : envs) known += (known.empty() ? "" : ", ") + k;
        throw std::invalid_argument("unknown environment '" + name + "' (known: " + known + ")");
    }
    return it->second;
}

}  // namespace nsplan
