#pragma once

#include "synthctl/augmented.hpp"
#include "synthctl/csv.hpp"
#include "synthctl/datagen.hpp"
#include "synthctl/error.hpp"
#include "synthctl/geneva.hpp"
#include "synthctl/inference.hpp"
#include "synthctl/panel.hpp"
#include "synthctl/scm.hpp"
#include "synthctl/sdid.hpp"
#include "synthctl/serialize.hpp"
#include "synthctl/simplex_qp.hpp"
#include "synthctl/svg.hpp"
#include "synthctl/types.hpp"
