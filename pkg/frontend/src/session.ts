// Portal session state. Credentials live only in this in-memory object;
// nothing is written to localStorage, sessionStorage, or cookies, so a
// reload always returns to the signed-out requester view.

import type { AuthProvider } from './api.js';

export type Role = 'REQUESTER' | 'OPERATOR' | 'TENANT_ADMIN';

export class Session implements AuthProvider {
  role: Role = 'REQUESTER';
  tenantId: string | null = null;
  private opKey: string | null = null;
  private creds: { clientId: string; clientSecret: string } | null = null;

  operatorKey(): string | null {
    return this.opKey;
  }

  tenantCreds(): { clientId: string; clientSecret: string } | null {
    return this.creds;
  }

  signInOperator(key: string): void {
    this.opKey = key;
    this.role = 'OPERATOR';
  }

  signInTenant(tenantId: string, clientId: string, clientSecret: string): void {
    this.tenantId = tenantId;
    this.creds = { clientId, clientSecret };
    this.role = 'TENANT_ADMIN';
  }

  signOut(): void {
    this.opKey = null;
    this.creds = null;
    this.tenantId = null;
    this.role = 'REQUESTER';
  }
}
