#pragma once

#include "mtmct/types.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include <vector>

namespace mtmct::detail {

namespace bg = boost::geometry;

using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint>;

inline BgPolygon to_boost(const std::vector<Point>& vertices) {
    BgPolygon polygon;
    for (const auto& v : vertices) {
        bg::append(polygon.outer(), BgPoint(v.x, v.y));
    }
    bg::correct(polygon);
    return polygon;
}

/// Inclusive of the boundary.
inline bool covers(const BgPolygon& polygon, const Point& p) {
    return bg::covered_by(BgPoint(p.x, p.y), polygon);
}

}  // namespace mtmct::detail
