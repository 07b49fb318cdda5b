//
// Project molscale - Copyright 2026 molscale authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "molscale/canonical.hpp"
#include "molscale/codecs.hpp"
#include "molscale/deepsmiles.hpp"
#include "molscale/denovo_metrics.hpp"
#include "molscale/element.hpp"
#include "molscale/fragments.hpp"
#include "molscale/frontier.hpp"
#include "molscale/grid.hpp"
#include "molscale/io.hpp"
#include "molscale/mol_graph.hpp"
#include "molscale/plot.hpp"
#include "molscale/report.hpp"
#include "molscale/representation.hpp"
#include "molscale/runlog.hpp"
#include "molscale/safe.hpp"
#include "molscale/scaling_fit.hpp"
#include "molscale/smiles.hpp"
#include "molscale/tokenizer.hpp"
