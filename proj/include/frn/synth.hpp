#pragma once

#include "frn/image.hpp"
#include "frn/rng.hpp"

namespace frn {

// Deterministic procedural face-like image: gradient background, shaded head
// ellipse, hair, eyes/brows/nose/mouth, plus low-amplitude texture. Sample
// data for smoke tests and toy training runs — no real photographs ship with
// the toolkit.
Image synth_face(Seed seed, int size);

// writes count faces as PNG files 00000.png .. into dir
void synth_face_dir(const std::string& dir, int count, int size, Seed seed);

}  // namespace frn
