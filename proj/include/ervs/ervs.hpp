#pragma once

#include "ervs/error.hpp"
#include "ervs/evaluation.hpp"
#include "ervs/geometry.hpp"
#include "ervs/io.hpp"
#include "ervs/json_io.hpp"
#include "ervs/resistance.hpp"
#include "ervs/resistance_matrix.hpp"
#include "ervs/scene.hpp"
#include "ervs/strategies.hpp"
#include "ervs/view_selection.hpp"
