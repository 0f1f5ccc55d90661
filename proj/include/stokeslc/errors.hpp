#pragma once

#include <stdexcept>
#include <string>

namespace stokeslc {

/// Triangle with (numerically) collinear vertices.
struct DegenerateTriangle : std::runtime_error {
    explicit DegenerateTriangle(const std::string& what) : std::runtime_error(what) {}
};

/// Mesh violating the manifold / simply-connected assumptions.
struct InvalidMesh : std::runtime_error {
    explicit InvalidMesh(const std::string& what) : std::runtime_error(what) {}
};

/// The requested macroelement patch cannot be formed around the element.
struct PatchUnavailable : std::runtime_error {
    explicit PatchUnavailable(const std::string& what) : std::runtime_error(what) {}
};

/// Grid outside the assumptions of the tied pressure space.
struct UnsupportedGrid : std::runtime_error {
    explicit UnsupportedGrid(const std::string& what) : std::runtime_error(what) {}
};

/// A (near-)zero pivot arose while factorizing the saddle-point system.
/// Usually signals missing pressure constraints.
struct SingularSystem : std::runtime_error {
    explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stokeslc
