#pragma once

#include <deque>
#include <initializer_list>
#include <string>

#include "manner/gridworld.hpp"

namespace testing {

inline manner::ActionSeq seq(std::string_view text) { return manner::parse_actions(text); }

inline manner::GridObject obj(manner::Shape shape, manner::Color color, int size, int row, int col) {
  return {shape, color, size, {row, col}};
}

inline manner::WorldState world(int row, int col, manner::Heading heading,
                                std::initializer_list<manner::GridObject> objects,
                                std::size_t target = 0, int grid = 6) {
  manner::WorldState w;
  w.grid_size = grid;
  w.agent_position = {row, col};
  w.agent_heading = heading;
  w.objects = objects;
  w.target_index = target;
  return w;
}

inline std::string repeat(std::string_view unit, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += unit;
  }
  return out;
}

// Shortest 4-connected path length on an empty grid, by breadth-first search.
inline int bfs_distance(int grid, manner::Position from, manner::Position to) {
  std::vector<int> dist(static_cast<std::size_t>(grid * grid), -1);
  auto id = [grid](manner::Position p) { return static_cast<std::size_t>(p.row * grid + p.col); };
  std::deque<manner::Position> queue{from};
  dist[id(from)] = 0;
  while (!queue.empty()) {
    const manner::Position p = queue.front();
    queue.pop_front();
    if (p == to) return dist[id(p)];
    for (manner::Heading h : {manner::Heading::North, manner::Heading::East, manner::Heading::South,
                              manner::Heading::West}) {
      const manner::Position q = p + manner::step(h);
      if (q.row < 0 || q.col < 0 || q.row >= grid || q.col >= grid || dist[id(q)] >= 0) continue;
      dist[id(q)] = dist[id(p)] + 1;
      queue.push_back(q);
    }
  }
  return -1;
}

}  // namespace testing
