#pragma once

#include "bhull/admm.hpp"
#include "bhull/dict.hpp"
#include "bhull/imaging.hpp"
#include "bhull/io.hpp"
#include "bhull/lab.hpp"
#include "bhull/model.hpp"
#include "bhull/poly.hpp"
#include "bhull/proj.hpp"
#include "bhull/tv.hpp"
