#pragma once

// Built-in manifolds and construction from expression text.
//
// Catalog descriptors are "name" or "name:key=value,key=value", e.g.
// "sphere:dim=2", "torus:R=1.1,r=1.0", "genus2".  Every catalog manifold is
// expression-backed, so derivatives flow through the same exact-AD path as
// user-defined manifolds.

#include <memory>
#include <string>
#include <vector>

#include "manifoldwalk/geometry.hpp"

namespace mwalk {

struct CatalogEntry {
    std::string name;
    std::string parameters;  // human-readable key list with defaults
    std::string description;
};

const std::vector<CatalogEntry>& catalog_entries();

// Builds a catalog manifold from a descriptor.  Throws ConfigError on an
// unknown name, unknown key, or malformed value.
std::shared_ptr<const Manifold> make_manifold(const std::string& descriptor);

// Level set of k expression components in n ambient variables.  A default
// start point is located by projecting a fixed list of seed points onto the
// level set; throws ConfigError when none of them converges.
std::shared_ptr<const Manifold> make_implicit_manifold(
    int ambient_dim, const std::vector<std::string>& components,
    const std::string& name = "implicit");

// Single periodic chart with n = components.size() ambient coordinates.
std::shared_ptr<const Manifold> make_parametric_manifold(
    int dim, const std::vector<std::string>& components, const Vec& periods,
    const std::string& name = "parametric");

}  // namespace mwalk
